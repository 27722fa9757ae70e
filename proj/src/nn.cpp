#include "lulc/nn.hpp"

#include "lulc/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

namespace lulc {

std::string to_string(Variant variant) { return variant == Variant::classifier ? "classifier" : "embedding"; }

Variant variant_from_string(const std::string& text) {
    if (text == "classifier") return Variant::classifier;
    if (text == "embedding") return Variant::embedding;
    fail(ErrorKind::config, "unknown model variant '" + text + "'");
}

std::size_t TensorSpec::size() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

void validate(const Architecture& arch) {
    if (arch.channels < 1) fail(ErrorKind::config, "architecture needs at least one input channel");
    if (arch.classes < 2) fail(ErrorKind::config, "architecture needs at least two classes");
    if (!(arch.dropout_rate >= 0.0 && arch.dropout_rate < 1.0)) fail(ErrorKind::config, "dropout rate must be in [0, 1)");
}

std::vector<TensorSpec> Architecture::parameter_specs() const {
    const int c1 = conv1_filters, c2 = conv2_filters, d1 = dense1_units;
    std::vector<TensorSpec> specs = {
        {"conv1.kernel", {channels, c1}}, {"conv1.bias", {c1}},
        {"conv2.kernel", {c1, c2}},       {"conv2.bias", {c2}},
        {"bn.gamma", {c2}},               {"bn.beta", {c2}},
        {"dense1.kernel", {flat_size(), d1}}, {"dense1.bias", {d1}},
    };
    if (variant == Variant::classifier) {
        specs.push_back({"dense2.kernel", {d1, dense2_units}});
        specs.push_back({"dense2.bias", {dense2_units}});
        specs.push_back({"dense3.kernel", {dense2_units, dense3_units}});
        specs.push_back({"dense3.bias", {dense3_units}});
        specs.push_back({"output.kernel", {dense3_units, classes}});
        specs.push_back({"output.bias", {classes}});
    } else {
        specs.push_back({"embedding.kernel", {d1, classes}});
        specs.push_back({"embedding.bias", {classes}});
    }
    return specs;
}

std::size_t Architecture::trainable_count() const {
    std::size_t n = 0;
    for (const auto& s : parameter_specs()) n += s.size();
    return n;
}

std::vector<DenseLayer> hidden_layers(const Architecture& arch) {
    std::vector<DenseLayer> layers = {{kDense1Kernel, kDense1Bias, arch.flat_size(), Architecture::dense1_units}};
    if (arch.variant == Variant::classifier) {
        layers.push_back({8, 9, Architecture::dense1_units, Architecture::dense2_units});
        layers.push_back({10, 11, Architecture::dense2_units, Architecture::dense3_units});
    }
    return layers;
}

DenseLayer head_layer(const Architecture& arch) {
    if (arch.variant == Variant::classifier) return {12, 13, Architecture::dense3_units, arch.classes};
    return {8, 9, Architecture::dense1_units, arch.classes};
}

template <class Real>
std::size_t BasicModel<Real>::trainable_count() const {
    std::size_t n = 0;
    for (const auto& p : params) n += p.size();
    return n;
}

template <class Real>
BasicModel<Real> zero_model(const Architecture& arch) {
    validate(arch);
    BasicModel<Real> model;
    model.arch = arch;
    for (const auto& spec : arch.parameter_specs()) model.params.emplace_back(spec.size(), Real(0));
    std::fill(model.params[kBnGamma].begin(), model.params[kBnGamma].end(), Real(1));
    model.running_mean.assign(Architecture::conv2_filters, Real(0));
    model.running_var.assign(Architecture::conv2_filters, Real(1));
    model.input_norm.mean.assign(arch.channels, 0.0);
    model.input_norm.sd.assign(arch.channels, 1.0);
    model.catalog = ClassCatalog::numbered(arch.classes);
    return model;
}

Model init_model(const Architecture& arch, std::uint64_t seed) {
    auto model = zero_model<float>(arch);
    Rng rng(seed);
    const auto specs = arch.parameter_specs();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        if (specs[i].shape.size() != 2) continue;  // biases and BN vectors keep their defaults
        const double limit = std::sqrt(6.0 / (specs[i].shape[0] + specs[i].shape[1]));
        for (auto& w : model.params[i]) w = static_cast<float>(rng.uniform(-limit, limit));
    }
    return model;
}

namespace {

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

}  // namespace

bool identical(const Model& a, const Model& b) {
    if (!(a.arch == b.arch) || a.params.size() != b.params.size() || !(a.catalog == b.catalog)) return false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (!same_bits(a.params[i], b.params[i])) return false;
    }
    return same_bits(a.running_mean, b.running_mean) && same_bits(a.running_var, b.running_var) &&
           same_bits(a.input_norm.mean, b.input_norm.mean) && same_bits(a.input_norm.sd, b.input_norm.sd);
}

// --- dense kernels ---------------------------------------------------------------

namespace {

// y[r][o] = b[o] + sum_i x[r][i] * w[i][o]
template <class Real>
void linear_forward(const Real* x, std::size_t rows, std::size_t in, const Real* w, const Real* b, std::size_t out,
                    Real* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        Real* yr = y + r * out;
        std::copy_n(b, out, yr);
        const Real* xr = x + r * in;
        for (std::size_t i = 0; i < in; ++i) {
            const Real xi = xr[i];
            if (xi == Real(0)) continue;
            const Real* wi = w + i * out;
            for (std::size_t o = 0; o < out; ++o) yr[o] += xi * wi[o];
        }
    }
}

template <class Real>
Real dot(const Real* a, const Real* b, std::size_t n) {
    Real acc[4] = {0, 0, 0, 0};
    const std::size_t blocked = n / 4 * 4;
    std::size_t i = 0;
    for (; i < blocked; i += 4) {
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i) acc[0] += a[i] * b[i];
    return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

// Accumulates dW, db and (optionally) writes dx.
template <class Real>
void linear_backward(const Real* x, std::size_t rows, std::size_t in, const Real* w, std::size_t out, const Real* dy,
                     Real* dw, Real* db, Real* dx) {
    for (std::size_t r = 0; r < rows; ++r) {
        const Real* xr = x + r * in;
        const Real* dyr = dy + r * out;
        for (std::size_t o = 0; o < out; ++o) db[o] += dyr[o];
        for (std::size_t i = 0; i < in; ++i) {
            const Real xi = xr[i];
            if (xi == Real(0)) continue;
            Real* dwi = dw + i * out;
            for (std::size_t o = 0; o < out; ++o) dwi[o] += xi * dyr[o];
        }
        if (dx) {
            Real* dxr = dx + r * in;
            for (std::size_t i = 0; i < in; ++i) dxr[i] = dot(dyr, w + i * out, out);
        }
    }
}

template <class Real>
void relu(const std::vector<Real>& z, std::vector<Real>& a) {
    a.resize(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) a[i] = z[i] > Real(0) ? z[i] : Real(0);
}

template <class Real>
void relu_backward(const std::vector<Real>& z, std::vector<Real>& grad) {
    for (std::size_t i = 0; i < z.size(); ++i) {
        if (!(z[i] > Real(0))) grad[i] = Real(0);
    }
}

}  // namespace

// --- layers ------------------------------------------------------------------

template <class Real>
std::vector<Real> sample_gaussian_noise(std::size_t count, double rate, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorKind::config, "gaussian dropout rate must be in [0, 1)");
    const double stddev = std::sqrt(rate / (1.0 - rate));
    std::vector<Real> noise(count);
    for (auto& n : noise) n = static_cast<Real>(1.0 + stddev * rng.normal());
    return noise;
}

template <class Real>
void gaussian_dropout(std::span<Real> activations, double rate, Mode mode, Rng& rng) {
    if (!(rate >= 0.0 && rate < 1.0)) fail(ErrorKind::config, "gaussian dropout rate must be in [0, 1)");
    if (mode == Mode::eval || rate == 0.0) return;
    const auto noise = sample_gaussian_noise<Real>(activations.size(), rate, rng);
    for (std::size_t i = 0; i < activations.size(); ++i) activations[i] *= noise[i];
}

template <class Real>
BatchNormOutput<Real> batchnorm(std::span<const Real> x, std::size_t rows, std::size_t channels, int batch,
                                std::span<const Real> gamma, std::span<const Real> beta,
                                std::span<const Real> running_mean, std::span<const Real> running_var, Mode mode,
                                double epsilon) {
    if (x.size() != rows * channels || gamma.size() != channels || beta.size() != channels) {
        fail(ErrorKind::shape, "batchnorm: buffer sizes do not match rows x channels");
    }
    BatchNormOutput<Real> out;
    out.mean.assign(channels, Real(0));
    out.var.assign(channels, Real(0));
    if (mode == Mode::train) {
        if (batch < 2) fail(ErrorKind::batch_size, "batch normalization in train mode needs at least 2 samples");
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < channels; ++c) out.mean[c] += x[r * channels + c];
        }
        for (auto& m : out.mean) m /= static_cast<Real>(rows);
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < channels; ++c) {
                const Real d = x[r * channels + c] - out.mean[c];
                out.var[c] += d * d;
            }
        }
        for (auto& v : out.var) v /= static_cast<Real>(rows);
    } else {
        if (running_mean.size() != channels || running_var.size() != channels) {
            fail(ErrorKind::shape, "batchnorm: running statistics do not match channel count");
        }
        std::copy(running_mean.begin(), running_mean.end(), out.mean.begin());
        std::copy(running_var.begin(), running_var.end(), out.var.begin());
    }
    std::vector<Real> inv_std(channels);
    for (std::size_t c = 0; c < channels; ++c) inv_std[c] = Real(1) / std::sqrt(out.var[c] + static_cast<Real>(epsilon));
    out.xhat.resize(x.size());
    out.output.resize(x.size());
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t i = r * channels + c;
            out.xhat[i] = (x[i] - out.mean[c]) * inv_std[c];
            out.output[i] = gamma[c] * out.xhat[i] + beta[c];
        }
    }
    return out;
}

template <class Real>
void update_running_stats(std::span<Real> running_mean, std::span<Real> running_var, std::span<const Real> batch_mean,
                          std::span<const Real> batch_var, std::size_t rows, double momentum) {
    const double unbias = rows > 1 ? static_cast<double>(rows) / static_cast<double>(rows - 1) : 1.0;
    for (std::size_t c = 0; c < running_mean.size(); ++c) {
        running_mean[c] = static_cast<Real>(momentum * running_mean[c] + (1.0 - momentum) * batch_mean[c]);
        running_var[c] = static_cast<Real>(momentum * running_var[c] + (1.0 - momentum) * batch_var[c] * unbias);
    }
}

// --- forward / backward --------------------------------------------------------

template <class Real>
DropoutNoise<Real> sample_dropout_noise(const Architecture& arch, int batch, Rng& rng) {
    DropoutNoise<Real> noise;
    for (const auto& layer : hidden_layers(arch)) {
        noise.layers.push_back(
            sample_gaussian_noise<Real>(static_cast<std::size_t>(batch) * layer.out, arch.dropout_rate, rng));
    }
    return noise;
}

template <class Real>
ForwardCache<Real> forward(const BasicModel<Real>& model, std::span<const Real> inputs, int batch, Mode mode,
                           const DropoutNoise<Real>* noise) {
    const auto& arch = model.arch;
    if (batch < 1) fail(ErrorKind::batch_size, "forward needs at least one sample");
    if (inputs.size() != static_cast<std::size_t>(batch) * arch.input_size()) {
        fail(ErrorKind::shape, "forward: input holds " + std::to_string(inputs.size()) + " values, expected " +
                                   std::to_string(batch) + " x 3 x 3 x " + std::to_string(arch.channels));
    }
    if (mode == Mode::train && batch < 2) fail(ErrorKind::batch_size, "train-mode forward needs batch >= 2");
    const auto hidden = hidden_layers(arch);
    if (mode == Mode::train) {
        if (!noise || noise->layers.size() != hidden.size()) fail(ErrorKind::mode, "train-mode forward needs dropout noise");
        for (std::size_t l = 0; l < hidden.size(); ++l) {
            if (noise->layers[l].size() != static_cast<std::size_t>(batch) * hidden[l].out) {
                fail(ErrorKind::shape, "dropout noise does not match the batch");
            }
        }
    }

    const auto& p = model.params;
    const std::size_t positions = static_cast<std::size_t>(batch) * kPatchPixels;
    const std::size_t c1 = Architecture::conv1_filters, c2 = Architecture::conv2_filters;

    ForwardCache<Real> cache;
    cache.mode = mode;
    cache.batch = batch;
    cache.input.assign(inputs.begin(), inputs.end());

    cache.z1.resize(positions * c1);
    linear_forward(cache.input.data(), positions, arch.channels, p[kConv1Kernel].data(), p[kConv1Bias].data(), c1,
                   cache.z1.data());
    relu(cache.z1, cache.a1);
    cache.z2.resize(positions * c2);
    linear_forward(cache.a1.data(), positions, c1, p[kConv2Kernel].data(), p[kConv2Bias].data(), c2, cache.z2.data());
    relu(cache.z2, cache.a2);

    cache.bn = batchnorm<Real>(cache.a2, positions, c2, batch, p[kBnGamma], p[kBnBeta], model.running_mean,
                               model.running_var, mode, arch.bn_epsilon);

    // Row-major positions x 64 is already the flattened batch x 576 (y, x, c) layout.
    const std::vector<Real>* h = &cache.bn.output;
    cache.hidden_z.resize(hidden.size());
    cache.hidden_a.resize(hidden.size());
    cache.hidden_out.resize(hidden.size());
    for (std::size_t l = 0; l < hidden.size(); ++l) {
        const auto& layer = hidden[l];
        auto& z = cache.hidden_z[l];
        z.resize(static_cast<std::size_t>(batch) * layer.out);
        linear_forward(h->data(), batch, layer.in, p[layer.kernel_slot].data(), p[layer.bias_slot].data(), layer.out,
                       z.data());
        relu(z, cache.hidden_a[l]);
        cache.hidden_out[l] = cache.hidden_a[l];
        if (mode == Mode::train) {
            const auto& n = noise->layers[l];
            for (std::size_t i = 0; i < n.size(); ++i) cache.hidden_out[l][i] *= n[i];
        }
        h = &cache.hidden_out[l];
    }
    if (mode == Mode::train) cache.noise = *noise;

    const auto head = head_layer(arch);
    cache.head.resize(static_cast<std::size_t>(batch) * head.out);
    linear_forward(h->data(), batch, head.in, p[head.kernel_slot].data(), p[head.bias_slot].data(), head.out,
                   cache.head.data());

    if (arch.variant == Variant::classifier) {
        cache.output = cache.head;
    } else {
        const std::size_t k = head.out;
        cache.norms.resize(batch);
        cache.output.resize(cache.head.size());
        for (int b = 0; b < batch; ++b) {
            const Real* e = cache.head.data() + b * k;
            const Real n = std::max(std::sqrt(dot(e, e, k)), Real(1e-12));
            cache.norms[b] = n;
            for (std::size_t j = 0; j < k; ++j) cache.output[b * k + j] = e[j] / n;
        }
    }
    return cache;
}

template <class Real>
std::vector<Real> training_logits(const BasicModel<Real>& model, const ForwardCache<Real>& cache) {
    if (model.arch.variant == Variant::classifier) return cache.output;
    std::vector<Real> logits(cache.output.size());
    const Real s = static_cast<Real>(model.arch.embedding_scale);
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = s * cache.output[i];
    return logits;
}

template <class Real>
LossResult<Real> softmax_cross_entropy(std::span<const Real> logits, int batch, int classes, std::span<const int> labels) {
    if (logits.size() != static_cast<std::size_t>(batch) * classes || labels.size() != static_cast<std::size_t>(batch)) {
        fail(ErrorKind::shape, "loss: logits/labels do not match the batch");
    }
    LossResult<Real> out;
    out.grad.resize(logits.size());
    double total = 0.0;
    for (int b = 0; b < batch; ++b) {
        const int y = labels[b];
        if (y < 0 || y >= classes) fail(ErrorKind::label, "label " + std::to_string(y) + " outside [0, " + std::to_string(classes) + ")");
        const Real* row = logits.data() + static_cast<std::size_t>(b) * classes;
        Real* g = out.grad.data() + static_cast<std::size_t>(b) * classes;
        const Real m = *std::max_element(row, row + classes);
        Real sum = 0;
        for (int k = 0; k < classes; ++k) {
            g[k] = std::exp(row[k] - m);
            sum += g[k];
        }
        total -= static_cast<double>(row[y] - m - std::log(sum));
        for (int k = 0; k < classes; ++k) g[k] = (g[k] / sum - (k == y ? Real(1) : Real(0))) / static_cast<Real>(batch);
    }
    out.loss = static_cast<Real>(total / batch);
    return out;
}

template <class Real>
Gradients<Real> backward(const BasicModel<Real>& model, const ForwardCache<Real>& cache, std::span<const int> labels) {
    if (cache.mode != Mode::train) fail(ErrorKind::mode, "backward requires a train-mode forward pass");
    const auto& arch = model.arch;
    const auto& p = model.params;
    const int batch = cache.batch;
    const int k = arch.classes;
    const std::size_t positions = static_cast<std::size_t>(batch) * kPatchPixels;
    const std::size_t c1 = Architecture::conv1_filters, c2 = Architecture::conv2_filters;

    const auto logits = training_logits(model, cache);
    auto loss = softmax_cross_entropy<Real>(logits, batch, k, labels);

    Gradients<Real> g;
    g.loss = loss.loss;
    for (const auto& t : p) g.params.emplace_back(t.size(), Real(0));

    // d loss / d head
    std::vector<Real> d_head = std::move(loss.grad);
    if (arch.variant == Variant::embedding) {
        const Real s = static_cast<Real>(arch.embedding_scale);
        for (int b = 0; b < batch; ++b) {
            const Real* u = cache.output.data() + static_cast<std::size_t>(b) * k;
            Real* d = d_head.data() + static_cast<std::size_t>(b) * k;
            for (int j = 0; j < k; ++j) d[j] *= s;
            const Real proj = dot(u, d, k);
            for (int j = 0; j < k; ++j) d[j] = (d[j] - u[j] * proj) / cache.norms[b];
        }
    }

    const auto hidden = hidden_layers(arch);
    const auto head = head_layer(arch);
    auto layer_input = [&](std::size_t l) -> const std::vector<Real>& {
        return l == 0 ? cache.bn.output : cache.hidden_out[l - 1];
    };

    std::vector<Real> d_h(static_cast<std::size_t>(batch) * head.in);
    linear_backward(cache.hidden_out.back().data(), batch, head.in, p[head.kernel_slot].data(), head.out, d_head.data(),
                    g.params[head.kernel_slot].data(), g.params[head.bias_slot].data(), d_h.data());

    for (std::size_t l = hidden.size(); l-- > 0;) {
        const auto& layer = hidden[l];
        const auto& noise = cache.noise.layers[l];
        for (std::size_t i = 0; i < d_h.size(); ++i) d_h[i] *= noise[i];
        relu_backward(cache.hidden_z[l], d_h);
        std::vector<Real> d_prev(static_cast<std::size_t>(batch) * layer.in);
        linear_backward(layer_input(l).data(), batch, layer.in, p[layer.kernel_slot].data(), layer.out, d_h.data(),
                        g.params[layer.kernel_slot].data(), g.params[layer.bias_slot].data(), d_prev.data());
        d_h = std::move(d_prev);
    }

    // Batch norm, differentiated through the batch statistics.
    std::vector<Real> sum_dy(c2, Real(0)), sum_dy_xhat(c2, Real(0));
    for (std::size_t r = 0; r < positions; ++r) {
        for (std::size_t c = 0; c < c2; ++c) {
            const std::size_t i = r * c2 + c;
            sum_dy[c] += d_h[i];
            sum_dy_xhat[c] += d_h[i] * cache.bn.xhat[i];
        }
    }
    for (std::size_t c = 0; c < c2; ++c) {
        g.params[kBnGamma][c] = sum_dy_xhat[c];
        g.params[kBnBeta][c] = sum_dy[c];
    }
    const Real n = static_cast<Real>(positions);
    std::vector<Real> scale(c2);
    for (std::size_t c = 0; c < c2; ++c) {
        scale[c] = p[kBnGamma][c] / (std::sqrt(cache.bn.var[c] + static_cast<Real>(arch.bn_epsilon)) * n);
    }
    std::vector<Real> d_a2(positions * c2);
    for (std::size_t r = 0; r < positions; ++r) {
        for (std::size_t c = 0; c < c2; ++c) {
            const std::size_t i = r * c2 + c;
            d_a2[i] = scale[c] * (n * d_h[i] - sum_dy[c] - cache.bn.xhat[i] * sum_dy_xhat[c]);
        }
    }

    relu_backward(cache.z2, d_a2);
    std::vector<Real> d_a1(positions * c1);
    linear_backward(cache.a1.data(), positions, c1, p[kConv2Kernel].data(), c2, d_a2.data(),
                    g.params[kConv2Kernel].data(), g.params[kConv2Bias].data(), d_a1.data());
    relu_backward(cache.z1, d_a1);
    linear_backward(cache.input.data(), positions, static_cast<std::size_t>(arch.channels), p[kConv1Kernel].data(), c1,
                    d_a1.data(), g.params[kConv1Kernel].data(), g.params[kConv1Bias].data(), static_cast<Real*>(nullptr));
    return g;
}

template <class Real>
Real batch_loss(const BasicModel<Real>& model, std::span<const Real> inputs, int batch, std::span<const int> labels,
                Mode mode, const DropoutNoise<Real>* noise) {
    const auto cache = forward(model, inputs, batch, mode, noise);
    const auto logits = training_logits(model, cache);
    return softmax_cross_entropy<Real>(logits, batch, model.arch.classes, labels).loss;
}

template <class Real>
int argmax(std::span<const Real> row) {
    int best = 0;
    for (std::size_t k = 1; k < row.size(); ++k) {
        if (row[k] > row[best]) best = static_cast<int>(k);
    }
    return best;
}

// --- inference -----------------------------------------------------------------

std::vector<float> normalize_inputs(const Model& model, std::span<const float> raw_values) {
    const auto channels = static_cast<std::size_t>(model.arch.channels);
    if (raw_values.size() % channels != 0) fail(ErrorKind::shape, "input values are not a whole number of pixels");
    const auto& norm = model.input_norm;
    if (norm.mean.size() != channels || norm.sd.size() != channels) {
        fail(ErrorKind::compatibility, "model normalization does not match its channel count");
    }
    std::vector<float> out(raw_values.size());
    for (std::size_t i = 0; i < raw_values.size(); ++i) {
        const std::size_t c = i % channels;
        out[i] = static_cast<float>((raw_values[i] - norm.mean[c]) / norm.sd[c]);
    }
    return out;
}

namespace {

constexpr std::size_t kInferenceChunk = 512;

template <class F>
void for_each_chunk(const Model& model, std::span<const float> raw_values, std::size_t count, F&& f) {
    const std::size_t per = model.arch.input_size();
    if (raw_values.size() != count * per) {
        fail(ErrorKind::shape, "inference input holds " + std::to_string(raw_values.size()) + " values, expected " +
                                   std::to_string(count) + " patches of " + std::to_string(per));
    }
    for (std::size_t start = 0; start < count; start += kInferenceChunk) {
        const std::size_t n = std::min(kInferenceChunk, count - start);
        const auto inputs = normalize_inputs(model, raw_values.subspan(start * per, n * per));
        const auto cache = forward<float>(model, inputs, static_cast<int>(n), Mode::eval);
        f(start, n, cache);
    }
}

}  // namespace

Prediction predict(const Model& model, std::span<const float> raw_values, std::size_t count) {
    const int k = model.arch.classes;
    Prediction out;
    out.classes = k;
    out.labels.resize(count);
    out.probabilities.resize(count * k);
    for_each_chunk(model, raw_values, count, [&](std::size_t start, std::size_t n, const ForwardCache<float>& cache) {
        const auto logits = training_logits(model, cache);
        for (std::size_t b = 0; b < n; ++b) {
            const std::span<const float> row(logits.data() + b * k, k);
            out.labels[start + b] = argmax(row);
            const float m = *std::max_element(row.begin(), row.end());
            double sum = 0.0;
            float* prob = out.probabilities.data() + (start + b) * k;
            for (int j = 0; j < k; ++j) sum += std::exp(static_cast<double>(row[j] - m));
            for (int j = 0; j < k; ++j) prob[j] = static_cast<float>(std::exp(static_cast<double>(row[j] - m)) / sum);
        }
    });
    return out;
}

Prediction predict(const Model& model, const std::vector<const Patch*>& patches) {
    std::vector<float> raw;
    raw.reserve(patches.size() * model.arch.input_size());
    for (const auto* p : patches) {
        if (p->values.size() != static_cast<std::size_t>(model.arch.input_size())) {
            fail(ErrorKind::compatibility, "patch channel count does not match the model");
        }
        raw.insert(raw.end(), p->values.begin(), p->values.end());
    }
    return predict(model, raw, patches.size());
}

std::vector<float> embed(const Model& model, std::span<const float> raw_values, std::size_t count) {
    if (model.arch.variant != Variant::embedding) fail(ErrorKind::compatibility, "embedding requires the embedding-variant model");
    std::vector<float> out(count * model.arch.output_dim());
    for_each_chunk(model, raw_values, count, [&](std::size_t start, std::size_t, const ForwardCache<float>& cache) {
        std::copy(cache.output.begin(), cache.output.end(), out.begin() + static_cast<std::ptrdiff_t>(start * model.arch.output_dim()));
    });
    return out;
}

// --- explicit instantiations ---------------------------------------------------

#define LULC_INSTANTIATE(Real)                                                                                      \
    template struct BasicModel<Real>;                                                                               \
    template BasicModel<Real> zero_model<Real>(const Architecture&);                                                \
    template std::vector<Real> sample_gaussian_noise<Real>(std::size_t, double, Rng&);                              \
    template void gaussian_dropout<Real>(std::span<Real>, double, Mode, Rng&);                                      \
    template BatchNormOutput<Real> batchnorm<Real>(std::span<const Real>, std::size_t, std::size_t, int,            \
                                                   std::span<const Real>, std::span<const Real>,                    \
                                                   std::span<const Real>, std::span<const Real>, Mode, double);     \
    template void update_running_stats<Real>(std::span<Real>, std::span<Real>, std::span<const Real>,               \
                                             std::span<const Real>, std::size_t, double);                           \
    template DropoutNoise<Real> sample_dropout_noise<Real>(const Architecture&, int, Rng&);                         \
    template ForwardCache<Real> forward<Real>(const BasicModel<Real>&, std::span<const Real>, int, Mode,            \
                                              const DropoutNoise<Real>*);                                           \
    template std::vector<Real> training_logits<Real>(const BasicModel<Real>&, const ForwardCache<Real>&);           \
    template LossResult<Real> softmax_cross_entropy<Real>(std::span<const Real>, int, int, std::span<const int>);   \
    template Gradients<Real> backward<Real>(const BasicModel<Real>&, const ForwardCache<Real>&,                     \
                                            std::span<const int>);                                                  \
    template Real batch_loss<Real>(const BasicModel<Real>&, std::span<const Real>, int, std::span<const int>, Mode, \
                                   const DropoutNoise<Real>*);                                                      \
    template int argmax<Real>(std::span<const Real>);

LULC_INSTANTIATE(float)
LULC_INSTANTIATE(double)

#undef LULC_INSTANTIATE

}  // namespace lulc
