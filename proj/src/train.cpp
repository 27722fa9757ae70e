#include "lulc/train.hpp"

#include "detail/csv.hpp"
#include "lulc/error.hpp"
#include "lulc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lulc {

OptimizerKind optimizer_from_string(const std::string& text) {
    if (text == "adam") return OptimizerKind::adam;
    if (text == "sgd") return OptimizerKind::sgd;
    fail(ErrorKind::config, "unknown optimizer '" + text + "' (expected adam or sgd)");
}

void validate(const TrainConfig& config) {
    if (!(config.learning_rate >= 0.0)) fail(ErrorKind::config, "learning rate must be nonnegative");
    if (config.epochs < 1) fail(ErrorKind::config, "epochs must be at least 1");
    if (config.batch_size < 2) fail(ErrorKind::config, "batch size must be at least 2 (batch normalization)");
    if (!(config.bn_momentum >= 0.0 && config.bn_momentum <= 1.0)) fail(ErrorKind::config, "bn momentum must be in [0, 1]");
}

template <class Real>
Optimizer<Real>::Optimizer(const TrainConfig& config, const std::vector<std::vector<Real>>& shapes) : config_(config) {
    for (const auto& s : shapes) {
        m_.emplace_back(s.size(), Real(0));
        v_.emplace_back(s.size(), Real(0));
    }
}

template <class Real>
void Optimizer<Real>::step(std::vector<std::vector<Real>>& params, const std::vector<std::vector<Real>>& grads) {
    ++t_;
    const double lr = config_.learning_rate;
    if (config_.optimizer == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            for (std::size_t j = 0; j < params[i].size(); ++j) params[i][j] -= static_cast<Real>(lr * grads[i][j]);
        }
        return;
    }
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& p = params[i];
        auto& m = m_[i];
        auto& v = v_[i];
        const auto& g = grads[i];
        for (std::size_t j = 0; j < p.size(); ++j) {
            m[j] = static_cast<Real>(b1 * m[j] + (1.0 - b1) * g[j]);
            v[j] = static_cast<Real>(b2 * v[j] + (1.0 - b2) * g[j] * g[j]);
            const double m_hat = m[j] / correction1;
            const double v_hat = v[j] / correction2;
            p[j] -= static_cast<Real>(lr * m_hat / (std::sqrt(v_hat) + config_.epsilon));
        }
    }
}

template class Optimizer<float>;
template class Optimizer<double>;

namespace {

std::vector<float> gather_normalized(const Model& model, const std::vector<const Patch*>& patches) {
    std::vector<float> raw;
    raw.reserve(patches.size() * model.arch.input_size());
    for (const auto* p : patches) raw.insert(raw.end(), p->values.begin(), p->values.end());
    return normalize_inputs(model, raw);
}

}  // namespace

Evaluation evaluate(const Model& model, const std::vector<const Patch*>& patches) {
    Evaluation out;
    if (patches.empty()) return out;
    const auto inputs = gather_normalized(model, patches);
    const std::size_t per = model.arch.input_size();
    const int k = model.arch.classes;
    constexpr std::size_t chunk = 512;
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < patches.size(); start += chunk) {
        const std::size_t n = std::min(chunk, patches.size() - start);
        const std::span<const float> batch(inputs.data() + start * per, n * per);
        const auto cache = forward<float>(model, batch, static_cast<int>(n), Mode::eval);
        const auto logits = training_logits(model, cache);
        std::vector<int> labels(n);
        for (std::size_t b = 0; b < n; ++b) labels[b] = patches[start + b]->label_index;
        loss_sum += static_cast<double>(softmax_cross_entropy<float>(logits, static_cast<int>(n), k, labels).loss) * n;
        for (std::size_t b = 0; b < n; ++b) {
            const int pred = argmax(std::span<const float>(logits.data() + b * k, k));
            out.predicted.push_back(pred);
            out.truth.push_back(labels[b]);
            correct += pred == labels[b];
        }
    }
    out.loss = loss_sum / static_cast<double>(patches.size());
    out.accuracy = static_cast<double>(correct) / static_cast<double>(patches.size());
    return out;
}

TrainResult train(Model model, const PatchSet& patches, const TrainConfig& config,
                  const std::function<void(const EpochStats&)>& on_epoch) {
    validate(config);
    const auto& arch = model.arch;
    if (static_cast<std::size_t>(arch.channels) != patches.channel_count()) {
        fail(ErrorKind::compatibility, "model expects " + std::to_string(arch.channels) + " channels, patch set has " +
                                           std::to_string(patches.channel_count()));
    }
    if (static_cast<std::size_t>(arch.classes) != patches.catalog.size()) {
        fail(ErrorKind::compatibility, "model has " + std::to_string(arch.classes) + " classes, patch set catalog has " +
                                           std::to_string(patches.catalog.size()));
    }
    const auto train_set = patches.select(Split::train);
    const auto val_set = patches.select(Split::val);
    if (train_set.empty()) fail(ErrorKind::data, "train split is empty");
    if (val_set.empty()) fail(ErrorKind::data, "validation split is empty");

    {
        std::vector<float> samples;
        samples.reserve(train_set.size() * arch.input_size());
        for (const auto* p : train_set) samples.insert(samples.end(), p->values.begin(), p->values.end());
        model.input_norm = fit_normalization(samples, arch.channels);
    }
    model.catalog = patches.catalog;

    const std::size_t per = arch.input_size();
    const auto train_inputs = gather_normalized(model, train_set);
    const int k = arch.classes;

    Rng rng(config.seed);
    Optimizer<float> optimizer(config, model.params);
    TrainResult result;
    result.model = model;
    double best_acc = -1.0;

    std::vector<std::size_t> order(train_set.size());
    std::vector<float> batch_inputs;
    std::vector<float> scratch(per);
    std::vector<int> batch_labels;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span(order));
        double loss_sum = 0.0;
        std::size_t seen = 0, correct = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t n = std::min<std::size_t>(config.batch_size, order.size() - start);
            if (n < 2) continue;
            batch_inputs.resize(n * per);
            batch_labels.resize(n);
            for (std::size_t b = 0; b < n; ++b) {
                const std::size_t idx = order[start + b];
                const std::span<const float> src(train_inputs.data() + idx * per, per);
                const std::span<float> dst(batch_inputs.data() + b * per, per);
                if (config.augment) {
                    augment_values(src, dst, arch.channels, static_cast<int>(rng.below(kTransformCount)));
                } else {
                    std::copy(src.begin(), src.end(), dst.begin());
                }
                batch_labels[b] = train_set[idx]->label_index;
            }
            const auto noise = sample_dropout_noise<float>(arch, static_cast<int>(n), rng);
            const auto cache = forward<float>(model, batch_inputs, static_cast<int>(n), Mode::train, &noise);
            const auto grads = backward(model, cache, batch_labels);
            optimizer.step(model.params, grads.params);
            update_running_stats<float>(model.running_mean, model.running_var, cache.bn.mean, cache.bn.var,
                                        n * kPatchPixels, config.bn_momentum);

            const auto logits = training_logits(model, cache);
            loss_sum += static_cast<double>(grads.loss) * n;
            seen += n;
            for (std::size_t b = 0; b < n; ++b) {
                correct += argmax(std::span<const float>(logits.data() + b * k, k)) == batch_labels[b];
            }
        }
        const auto val = evaluate(model, val_set);
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = seen ? loss_sum / static_cast<double>(seen) : 0.0;
        stats.train_acc = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
        stats.val_loss = val.loss;
        stats.val_acc = val.accuracy;
        result.history.push_back(stats);
        if (on_epoch) on_epoch(stats);
        if (val.accuracy >= best_acc) {
            best_acc = val.accuracy;
            result.model = model;
            result.best_epoch = epoch;
        }
    }
    return result;
}

void write_history_csv(const std::vector<EpochStats>& history, const std::filesystem::path& path) {
    detail::CsvWriter csv;
    csv.row("epoch", "train_loss", "train_acc", "val_loss", "val_acc");
    for (const auto& h : history) csv.row(h.epoch, h.train_loss, h.train_acc, h.val_loss, h.val_acc);
    csv.save(path);
}

}  // namespace lulc
