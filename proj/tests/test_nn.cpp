#include "support.hpp"

#include "lulc/gradcheck.hpp"
#include "lulc/nn.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace lulc;

namespace {

std::vector<double> random_inputs(Rng& rng, const Architecture& arch, int batch) {
    std::vector<double> x(static_cast<std::size_t>(batch) * arch.input_size());
    for (auto& v : x) v = rng.normal();
    return x;
}

std::vector<float> to_float(const std::vector<double>& x) { return {x.begin(), x.end()}; }

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("parameter count of the baseline classifier") {
    // Layer-by-layer arithmetic: weights plus biases.
    const std::size_t conv1 = 13 * 128 + 128, conv2 = 128 * 64 + 64, bn = 2 * 64;
    const std::size_t d1 = 576 * 128 + 128, d2 = 128 * 32 + 32, d3 = 32 * 16 + 16, out = 16 * 17 + 17;
    Architecture arch;
    CHECK(arch.trainable_count() == conv1 + conv2 + bn + d1 + d2 + d3 + out);
    CHECK(arch.trainable_count() == 88977);
    CHECK(init_model(arch, 1).trainable_count() == 88977);

    Architecture emb;
    emb.variant = Variant::embedding;
    CHECK(emb.trainable_count() == conv1 + conv2 + bn + d1 + 128 * 17 + 17);
}

TEST_CASE("zero network yields uniform probabilities") {
    Architecture arch;
    const auto model = zero_model<float>(arch);
    Rng rng(1);
    const auto x = to_float(random_inputs(rng, arch, 3));
    const auto cache = forward(model, std::span<const float>(x), 3, Mode::eval);
    for (float v : cache.output) CHECK(v == 0.0f);
    Model m = model;
    m.input_norm = {std::vector<double>(13, 0.0), std::vector<double>(13, 1.0)};
    const auto pred = predict(m, x, 3);
    for (float p : pred.probabilities) CHECK(p == doctest::Approx(1.0 / 17.0).epsilon(1e-6));
    for (int l : pred.labels) CHECK(l == 0);
}

TEST_CASE("eval forward is deterministic and probabilities are distributions") {
    Architecture arch;
    auto model = init_model(arch, 7);
    model.input_norm = {std::vector<double>(13, 0.0), std::vector<double>(13, 1.0)};
    Rng rng(2);
    const auto x = to_float(random_inputs(rng, arch, 9));
    const auto a = predict(model, x, 9);
    const auto b = predict(model, x, 9);
    CHECK(a.labels == b.labels);
    CHECK(a.probabilities == b.probabilities);
    for (int i = 0; i < 9; ++i) {
        double sum = 0.0;
        for (int k = 0; k < 17; ++k) {
            CHECK(a.probabilities[i * 17 + k] >= 0.0f);
            sum += a.probabilities[i * 17 + k];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("embedding outputs have unit norm") {
    Architecture arch;
    arch.variant = Variant::embedding;
    auto model = init_model(arch, 3);
    model.input_norm = {std::vector<double>(13, 0.0), std::vector<double>(13, 1.0)};
    Rng rng(4);
    const auto x = to_float(random_inputs(rng, arch, 20));
    const auto e = embed(model, x, 20);
    REQUIRE(e.size() == 20u * 17u);
    for (int i = 0; i < 20; ++i) {
        double n = 0.0;
        for (int k = 0; k < 17; ++k) n += static_cast<double>(e[i * 17 + k]) * e[i * 17 + k];
        CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
    }
    Architecture cls;
    CHECK_ERROR_KIND(embed(init_model(cls, 1), x, 20), compatibility);
}

TEST_CASE("forward contract violations") {
    Architecture arch;
    const auto model = convert_model<double>(init_model(arch, 1));
    Rng rng(5);
    const auto x = random_inputs(rng, arch, 1);
    const auto noise = sample_dropout_noise<double>(arch, 1, rng);
    CHECK_ERROR_KIND(forward(model, std::span<const double>(x), 1, Mode::train, &noise), batch_size);
    CHECK_ERROR_KIND(forward(model, std::span<const double>(x).first(100), 1, Mode::eval), shape);
    const auto cache = forward(model, std::span<const double>(x), 1, Mode::eval);
    const std::vector<int> labels{0};
    CHECK_ERROR_KIND(backward(model, cache, std::span<const int>(labels)), mode);
}

TEST_CASE("softmax cross-entropy examples") {
    const std::vector<double> uniform(2 * 17, 0.3);
    const std::vector<int> labels{4, 16};
    const auto l = softmax_cross_entropy<double>(uniform, 2, 17, labels);
    CHECK(l.loss == doctest::Approx(std::log(17.0)).epsilon(1e-12));
    CHECK(l.loss == doctest::Approx(2.8332).epsilon(1e-4));
    for (int b = 0; b < 2; ++b) {
        double s = 0.0;
        for (int k = 0; k < 17; ++k) s += l.grad[b * 17 + k];
        CHECK(std::abs(s) < 1e-15);
    }
    const std::vector<int> bad{0, 17};
    CHECK_ERROR_KIND(softmax_cross_entropy<double>(uniform, 2, 17, bad), label);

    // Raising the true logit lowers the loss monotonically toward 0.
    double previous = 1e9;
    for (double z = 0.0; z <= 30.0; z += 2.0) {
        std::vector<double> logits(17, 0.0);
        logits[3] = z;
        const std::vector<int> one{3};
        const double loss = softmax_cross_entropy<double>(logits, 1, 17, one).loss;
        CHECK(loss < previous);
        previous = loss;
    }
    CHECK(previous < 1e-11);
}

TEST_CASE("gaussian dropout moments and identities") {
    Rng rng(123);
    const auto noise = sample_gaussian_noise<double>(1000000, 0.3, rng);
    const double mean = std::accumulate(noise.begin(), noise.end(), 0.0) / noise.size();
    double var = 0.0;
    for (double v : noise) var += (v - mean) * (v - mean);
    var /= noise.size();
    CHECK(std::abs(mean - 1.0) < 0.01);
    CHECK(std::abs(var - 0.3 / 0.7) < 0.01);

    std::vector<double> a{1, 2, 3};
    gaussian_dropout<double>(a, 0.0, Mode::train, rng);
    CHECK(a == std::vector<double>{1, 2, 3});
    gaussian_dropout<double>(a, 0.3, Mode::eval, rng);
    CHECK(a == std::vector<double>{1, 2, 3});
    CHECK_ERROR_KIND(gaussian_dropout<double>(a, 1.0, Mode::train, rng), config);
}

TEST_CASE("batch norm statistics") {
    Rng rng(9);
    const std::size_t rows = 4 * 9, channels = 64;
    std::vector<double> x(rows * channels);
    for (auto& v : x) v = rng.normal(3.0, 2.0);
    for (std::size_t r = 0; r < rows; ++r) x[r * channels + 5] = 7.0;  // constant channel
    const std::vector<double> gamma(channels, 1.0), beta(channels, 0.25), rm(channels, 0.0), rv(channels, 1.0);
    const auto out = batchnorm<double>(x, rows, channels, 4, gamma, beta, rm, rv, Mode::train);
    for (std::size_t c = 0; c < channels; ++c) {
        double m = 0.0, v = 0.0;
        for (std::size_t r = 0; r < rows; ++r) m += out.xhat[r * channels + c];
        m /= rows;
        for (std::size_t r = 0; r < rows; ++r) v += (out.xhat[r * channels + c] - m) * (out.xhat[r * channels + c] - m);
        v /= rows;
        CHECK(std::abs(m) < 1e-5);
        if (c != 5) CHECK(std::abs(v - 1.0) < 1e-4);
    }
    for (std::size_t r = 0; r < rows; ++r) CHECK(out.output[r * channels + 5] == doctest::Approx(0.25));

    const std::vector<double> unit_beta(channels, 0.0);
    const auto eval = batchnorm<double>(x, rows, channels, 4, gamma, unit_beta, rm, rv, Mode::eval);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(eval.output[i] == doctest::Approx(x[i] / std::sqrt(1.0 + 1e-5)));

    CHECK_ERROR_KIND(batchnorm<double>(std::span(x).first(9 * channels), 9, channels, 1, gamma, beta, rm, rv, Mode::train),
                     batch_size);

    std::vector<double> running_mean(channels, 0.0), running_var(channels, 1.0);
    update_running_stats<double>(running_mean, running_var, out.mean, out.var, rows, 0.99);
    CHECK(running_mean[0] == doctest::Approx(0.01 * out.mean[0]));
    CHECK(running_var[0] == doctest::Approx(0.99 + 0.01 * out.var[0] * rows / (rows - 1.0)));
}

TEST_CASE("analytic gradients match central differences") {
    for (auto variant : {Variant::classifier, Variant::embedding}) {
        Architecture arch;
        arch.variant = variant;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto r = check_gradients(arch, seed);
            CAPTURE(to_string(variant));
            CAPTURE(seed);
            CHECK(r.max_rel_error < 1e-4);
            std::size_t probed = 0;
            for (const auto& t : r.tensors) probed += t.probed;
            CHECK(probed > 100);
            CHECK(r.tensors.size() == arch.parameter_specs().size());
        }
    }
}

TEST_CASE("zero inputs kill conv kernel gradients only") {
    Architecture arch;
    auto model = convert_model<double>(init_model(arch, 4));
    for (auto& b : model.params[kConv1Bias]) b = 0.1;
    Rng rng(3);
    std::vector<double> x(4 * arch.input_size(), 0.0);
    const auto noise = sample_dropout_noise<double>(arch, 4, rng);
    const std::vector<int> labels{0, 1, 2, 3};
    const auto cache = forward(model, std::span<const double>(x), 4, Mode::train, &noise);
    const auto g = backward(model, cache, std::span<const int>(labels));
    for (double v : g.params[kConv1Kernel]) CHECK(v == 0.0);
}

TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
    Architecture arch;
    const auto model = convert_model<double>(init_model(arch, 6));
    Rng rng(10);
    const auto x = random_inputs(rng, arch, 3);
    const auto noise = sample_dropout_noise<double>(arch, 3, rng);
    const std::vector<int> labels{1, 5, 9};
    std::vector<double> x2 = x;
    x2.insert(x2.end(), x.begin(), x.end());
    DropoutNoise<double> noise2 = noise;
    for (auto& layer : noise2.layers) layer.insert(layer.end(), layer.begin(), layer.end());
    std::vector<int> labels2 = labels;
    labels2.insert(labels2.end(), labels.begin(), labels.end());

    const auto g1 = backward(model, forward(model, std::span<const double>(x), 3, Mode::train, &noise), std::span<const int>(labels));
    const auto g2 = backward(model, forward(model, std::span<const double>(x2), 6, Mode::train, &noise2), std::span<const int>(labels2));
    for (std::size_t t = 0; t < g1.params.size(); ++t) {
        for (std::size_t i = 0; i < g1.params[t].size(); ++i) {
            CHECK(g2.params[t][i] == doctest::Approx(g1.params[t][i]).epsilon(1e-9).scale(1e-12));
        }
    }
}

TEST_CASE("a small step along the negative gradient lowers the loss") {
    Architecture arch;
    auto model = convert_model<double>(init_model(arch, 12));
    Rng rng(12);
    const auto x = random_inputs(rng, arch, 8);
    const auto noise = sample_dropout_noise<double>(arch, 8, rng);
    std::vector<int> labels(8);
    for (auto& l : labels) l = static_cast<int>(rng.below(17));
    const auto cache = forward(model, std::span<const double>(x), 8, Mode::train, &noise);
    const auto g = backward(model, cache, std::span<const int>(labels));
    for (double eta : {1e-5, 1e-6}) {
        auto stepped = model;
        for (std::size_t t = 0; t < g.params.size(); ++t)
            for (std::size_t i = 0; i < g.params[t].size(); ++i) stepped.params[t][i] -= eta * g.params[t][i];
        const double after = batch_loss(stepped, std::span<const double>(x), 8, std::span<const int>(labels), Mode::train, &noise);
        CHECK(after < g.loss);
    }
}

TEST_CASE("argmax ties go to the lowest index") {
    const std::vector<float> row{0.5f, 2.0f, 2.0f, -1.0f};
    CHECK(argmax<float>(row) == 1);
    const std::vector<float> flat(5, 0.0f);
    CHECK(argmax<float>(flat) == 0);
}

}
