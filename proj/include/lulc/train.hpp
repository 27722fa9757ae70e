#pragma once

#include "lulc/nn.hpp"
#include "lulc/patchset.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace lulc {

enum class OptimizerKind { adam, sgd };

OptimizerKind optimizer_from_string(const std::string& text);

struct TrainConfig {
    double learning_rate = 1e-4;
    int epochs = 150;
    int batch_size = 32;
    std::uint64_t seed = 0;
    bool augment = false;
    OptimizerKind optimizer = OptimizerKind::adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    double bn_momentum = 0.99;
};

void validate(const TrainConfig& config);

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    Model model;  // parameters from the epoch with the best validation accuracy (ties: later epoch)
    std::vector<EpochStats> history;
    int best_epoch = 0;
};

// Adam (bias-corrected) or plain SGD over a flat list of parameter tensors.
template <class Real>
class Optimizer {
public:
    Optimizer(const TrainConfig& config, const std::vector<std::vector<Real>>& shapes);

    void step(std::vector<std::vector<Real>>& params, const std::vector<std::vector<Real>>& grads);

private:
    TrainConfig config_;
    std::vector<std::vector<Real>> m_;
    std::vector<std::vector<Real>> v_;
    long long t_ = 0;
};

// Fits input normalization on the train split, then runs epochs x ceil(N/B)
// steps. A trailing batch of a single sample is skipped (batch norm needs two).
// The model's catalog is taken from the patch set.
TrainResult train(Model model, const PatchSet& patches, const TrainConfig& config,
                  const std::function<void(const EpochStats&)>& on_epoch = {});

struct Evaluation {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<int> predicted;
    std::vector<int> truth;
};

Evaluation evaluate(const Model& model, const std::vector<const Patch*>& patches);

void write_history_csv(const std::vector<EpochStats>& history, const std::filesystem::path& path);

}  // namespace lulc
