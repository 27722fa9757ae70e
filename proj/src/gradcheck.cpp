#include "lulc/gradcheck.hpp"

#include "lulc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lulc {

namespace {

using DModel = BasicModel<double>;

std::vector<bool> relu_pattern(const ForwardCache<double>& cache) {
    std::vector<bool> out;
    auto add = [&out](const std::vector<double>& z) {
        for (double v : z) out.push_back(v > 0.0);
    };
    add(cache.z1);
    add(cache.z2);
    for (const auto& z : cache.hidden_z) add(z);
    return out;
}

}  // namespace

GradCheckResult check_gradients(const Architecture& arch, std::uint64_t seed, const GradCheckOptions& options) {
    Rng rng(seed);
    DModel model = convert_model<double>(init_model(arch, seed));
    // Move biases, scale and shift off their initial values so every path carries signal.
    const auto specs = arch.parameter_specs();
    for (std::size_t t = 0; t < specs.size(); ++t) {
        const bool is_kernel = specs[t].shape.size() == 2;
        const bool is_gamma = t == kBnGamma;
        for (auto& v : model.params[t]) {
            if (is_gamma) v = 1.0 + rng.normal(0.0, 0.2);
            else if (!is_kernel) v = rng.normal(0.0, 0.1);
        }
    }

    const int batch = options.batch;
    std::vector<double> inputs(static_cast<std::size_t>(batch) * arch.input_size());
    for (auto& v : inputs) v = rng.normal();
    std::vector<int> labels(batch);
    for (auto& l : labels) l = static_cast<int>(rng.below(arch.classes));
    const auto noise = sample_dropout_noise<double>(arch, batch, rng);

    const auto cache = forward(model, std::span<const double>(inputs), batch, Mode::train, &noise);
    const auto grads = backward(model, cache, std::span<const int>(labels));

    GradCheckResult result;
    for (std::size_t t = 0; t < specs.size(); ++t) {
        TensorCheck check;
        check.name = specs[t].name;
        const std::size_t size = model.params[t].size();
        std::vector<std::size_t> coords(size);
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (size > static_cast<std::size_t>(options.samples_per_tensor)) {
            rng.shuffle(std::span<std::size_t>(coords));
            coords.resize(options.samples_per_tensor);
        }
        for (std::size_t i : coords) {
            const double original = model.params[t][i];
            model.params[t][i] = original + options.step;
            const auto plus = forward(model, std::span<const double>(inputs), batch, Mode::train, &noise);
            const double loss_plus = softmax_cross_entropy<double>(training_logits(model, plus), batch, arch.classes,
                                                                   labels).loss;
            model.params[t][i] = original - options.step;
            const auto minus = forward(model, std::span<const double>(inputs), batch, Mode::train, &noise);
            const double loss_minus = softmax_cross_entropy<double>(training_logits(model, minus), batch, arch.classes,
                                                                    labels).loss;
            model.params[t][i] = original;
            if (relu_pattern(plus) != relu_pattern(minus)) {
                ++check.skipped;
                continue;
            }
            const double numeric = (loss_plus - loss_minus) / (2.0 * options.step);
            const double analytic = grads.params[t][i];
            const double denom = std::max({std::abs(analytic), std::abs(numeric), options.floor});
            check.max_rel_error = std::max(check.max_rel_error, std::abs(analytic - numeric) / denom);
            ++check.probed;
        }
        result.max_rel_error = std::max(result.max_rel_error, check.max_rel_error);
        result.tensors.push_back(std::move(check));
    }
    return result;
}

}  // namespace lulc
