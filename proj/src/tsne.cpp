#include "lulc/tsne.hpp"

#include "detail/binary_io.hpp"
#include "detail/csv.hpp"
#include "lulc/error.hpp"
#include "lulc/render.hpp"
#include "lulc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace lulc {

namespace {

constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBisection = 50;
constexpr double kMinGain = 0.01;
constexpr double kTiny = std::numeric_limits<double>::min();

void check_inputs(std::span<const double> x, std::size_t n, std::size_t dim, double perplexity) {
    if (x.size() != n * dim) fail(ErrorKind::shape, "t-SNE input is not n x dim");
    if (!(perplexity > 0.0)) fail(ErrorKind::config, "perplexity must be positive");
    if (static_cast<double>(n) < 3.0 * perplexity + 1.0) {
        fail(ErrorKind::data, "t-SNE needs at least 3 * perplexity + 1 points, got " + std::to_string(n));
    }
    for (double v : x) {
        if (!std::isfinite(v)) fail(ErrorKind::numeric, "t-SNE input contains a non-finite value");
    }
}

std::vector<double> squared_distances(std::span<const double> x, std::size_t n, std::size_t dim) {
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                const double diff = x[i * dim + k] - x[j * dim + k];
                s += diff * diff;
            }
            d[i * n + j] = d[j * n + i] = s;
        }
    }
    return d;
}

}  // namespace

Affinities compute_affinities(std::span<const double> x, std::size_t n, std::size_t dim, double perplexity) {
    check_inputs(x, n, dim, perplexity);
    const auto dist = squared_distances(x, n, dim);
    const double target = std::log(perplexity);

    Affinities out;
    out.n = n;
    out.row_perplexity.resize(n);
    out.beta.resize(n);
    std::vector<double> cond(n * n, 0.0);
    std::vector<double> row(n);

    for (std::size_t i = 0; i < n; ++i) {
        // Shifting by the nearest distance leaves the normalized row unchanged
        // and keeps exp() away from underflow.
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) dmin = std::min(dmin, dist[i * n + j]);
        }
        double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
        double entropy = 0.0, sum = 0.0;
        for (int step = 0; step < kMaxBisection; ++step) {
            sum = 0.0;
            double weighted = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) {
                    row[j] = 0.0;
                    continue;
                }
                const double shifted = dist[i * n + j] - dmin;
                row[j] = std::exp(-beta * shifted);
                sum += row[j];
                weighted += shifted * row[j];
            }
            entropy = std::log(sum) + beta * weighted / sum;
            const double diff = entropy - target;
            if (std::abs(diff) < kEntropyTolerance) break;
            if (diff > 0.0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
            } else {
                hi = beta;
                beta = (beta + lo) / 2.0;
            }
        }
        for (std::size_t j = 0; j < n; ++j) cond[i * n + j] = row[j] / sum;
        out.beta[i] = beta;
        out.row_perplexity[i] = std::exp(entropy);
    }

    out.p.assign(n * n, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out.p[i * n + j] = cond[i * n + j] + cond[j * n + i];
            total += out.p[i * n + j];
        }
    }
    for (auto& v : out.p) v /= total;
    return out;
}

TsneResult tsne(std::span<const double> x, std::size_t n, std::size_t dim, const TsneConfig& config) {
    if (config.iterations < 1) fail(ErrorKind::config, "t-SNE needs at least one iteration");
    const auto aff = compute_affinities(x, n, dim, config.perplexity);
    const auto& p = aff.p;

    Rng rng(config.seed);
    TsneResult out;
    out.y.resize(n * 2);
    for (auto& v : out.y) v = rng.normal(0.0, config.init_sd);
    std::vector<double> velocity(n * 2, 0.0), gains(n * 2, 1.0), grad(n * 2), num(n * n);
    auto& y = out.y;

    for (int iter = 0; iter < config.iterations; ++iter) {
        const double exaggeration = iter < config.exaggeration_iterations ? config.exaggeration : 1.0;
        const double momentum = iter < config.momentum_switch ? config.momentum : config.final_momentum;

        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            num[i * n + i] = 0.0;
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y[2 * i] - y[2 * j];
                const double dy = y[2 * i + 1] - y[2 * j + 1];
                const double q = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = num[j * n + i] = q;
                z += 2.0 * q;
            }
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double gx = 0.0, gy = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double w = num[i * n + j];
                const double m = (exaggeration * p[i * n + j] - w / z) * w;
                gx += m * (y[2 * i] - y[2 * j]);
                gy += m * (y[2 * i + 1] - y[2 * j + 1]);
            }
            grad[2 * i] = 4.0 * gx;
            grad[2 * i + 1] = 4.0 * gy;
        }

        for (std::size_t k = 0; k < n * 2; ++k) {
            const bool same_sign = (grad[k] > 0.0) == (velocity[k] > 0.0);
            gains[k] = same_sign ? gains[k] * 0.8 : gains[k] + 0.2;
            gains[k] = std::max(gains[k], kMinGain);
            velocity[k] = momentum * velocity[k] - config.learning_rate * gains[k] * grad[k];
            y[k] += velocity[k];
        }
        double mx = 0.0, my = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mx += y[2 * i];
            my += y[2 * i + 1];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[2 * i] -= mx;
            y[2 * i + 1] -= my;
        }

        // KL of the embedding after this update, against the plain P.
        double zq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double dx = y[2 * i] - y[2 * j];
                const double dy = y[2 * i + 1] - y[2 * j + 1];
                const double q = 1.0 / (1.0 + dx * dx + dy * dy);
                num[i * n + j] = q;
                zq += 2.0 * q;
            }
        }
        double kl = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double pij = p[i * n + j];
                if (pij > 0.0) kl += 2.0 * pij * std::log(pij / std::max(num[i * n + j] / zq, kTiny));
            }
        }
        if (!std::isfinite(kl)) fail(ErrorKind::numeric, "t-SNE diverged at iteration " + std::to_string(iter + 1));
        out.kl_history.push_back(kl);
    }
    return out;
}

void write_tsne_csv(std::span<const double> y, std::span<const int> labels, const std::filesystem::path& path) {
    if (y.size() != labels.size() * 2) fail(ErrorKind::shape, "t-SNE coordinates and labels disagree in size");
    detail::CsvWriter csv;
    csv.row("label_index", "x", "y");
    for (std::size_t i = 0; i < labels.size(); ++i) csv.row(labels[i], y[2 * i], y[2 * i + 1]);
    csv.save(path);
}

void write_kl_csv(std::span<const double> kl_history, const std::filesystem::path& path) {
    detail::CsvWriter csv;
    csv.row("iteration", "kl");
    for (std::size_t i = 0; i < kl_history.size(); ++i) csv.row(i + 1, kl_history[i]);
    csv.save(path);
}

void write_tsne_svg(std::span<const double> y, std::span<const int> labels, const ClassCatalog& catalog,
                    const std::filesystem::path& path) {
    if (y.size() != labels.size() * 2) fail(ErrorKind::shape, "t-SNE coordinates and labels disagree in size");
    constexpr double size = 600.0, margin = 20.0, legend = 220.0;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!labels.empty()) {
        xmin = xmax = y[0];
        ymin = ymax = y[1];
        for (std::size_t i = 0; i < labels.size(); ++i) {
            xmin = std::min(xmin, y[2 * i]);
            xmax = std::max(xmax, y[2 * i]);
            ymin = std::min(ymin, y[2 * i + 1]);
            ymax = std::max(ymax, y[2 * i + 1]);
        }
    }
    const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
    auto px = [&](double v, double lo) { return margin + (v - lo) / span * (size - 2 * margin); };

    std::string svg;
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\">\n"
                  "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                  size + legend, size);
    svg += buf;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Rgb c = class_color(labels[i]);
        std::snprintf(buf, sizeof(buf), "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"rgb(%d,%d,%d)\"/>\n",
                      px(y[2 * i], xmin), size - px(y[2 * i + 1], ymin), c.r, c.g, c.b);
        svg += buf;
    }
    for (std::size_t k = 0; k < catalog.size(); ++k) {
        const Rgb c = class_color(static_cast<int>(k));
        const double ty = margin + 16.0 * static_cast<double>(k);
        std::snprintf(buf, sizeof(buf),
                      "<rect x=\"%g\" y=\"%g\" width=\"10\" height=\"10\" fill=\"rgb(%d,%d,%d)\"/>"
                      "<text x=\"%g\" y=\"%g\" font-size=\"11\" font-family=\"sans-serif\">",
                      size + 4, ty, c.r, c.g, c.b, size + 18, ty + 9);
        svg += buf;
        std::string label = std::to_string(k) + ": " + catalog[k].code + " " + catalog[k].name;
        for (char ch : label) {
            if (ch == '&') svg += "&amp;";
            else if (ch == '<') svg += "&lt;";
            else if (ch == '>') svg += "&gt;";
            else svg += ch;
        }
        svg += "</text>\n";
    }
    svg += "</svg>\n";
    detail::write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(svg.data()), svg.size()));
}

}  // namespace lulc
