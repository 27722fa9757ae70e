#pragma once

#include "lulc/catalog.hpp"
#include "lulc/patchset.hpp"
#include "lulc/raster.hpp"
#include "lulc/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lulc {

enum class Variant { classifier, embedding };
enum class Mode { train, eval };

std::string to_string(Variant variant);
Variant variant_from_string(const std::string& text);

struct TensorSpec {
    std::string name;
    std::vector<int> shape;

    std::size_t size() const;
};

// Fixed topology on a 3x3xC input:
//   conv1x1(C->128, relu) -> conv1x1(128->64, relu) -> batchnorm(64) -> flatten(576)
//   classifier: dense(576->128) dense(128->32) dense(32->16), each relu + gaussian
//               dropout, then dense(16->K) logits
//   embedding:  dense(576->128, relu + gaussian dropout), dense(128->K), L2 norm
// Dense kernels are stored [in][out], row-major.
struct Architecture {
    static constexpr int conv1_filters = 128;
    static constexpr int conv2_filters = 64;
    static constexpr int dense1_units = 128;
    static constexpr int dense2_units = 32;
    static constexpr int dense3_units = 16;

    int channels = 13;
    int classes = 17;
    Variant variant = Variant::classifier;
    double dropout_rate = 0.3;
    double embedding_scale = 10.0;  // cosine-softmax scale for training the embedding head
    double bn_epsilon = 1e-5;

    int flat_size() const { return kPatchPixels * conv2_filters; }
    // The embedding width equals the class count (17 for the baseline catalog)
    // so the scaled unit vector can be read directly as logits.
    int output_dim() const { return classes; }
    int input_size() const { return kPatchPixels * channels; }

    std::vector<TensorSpec> parameter_specs() const;
    std::size_t trainable_count() const;

    bool operator==(const Architecture&) const = default;
};

void validate(const Architecture& arch);

// Parameter slots shared by both variants; the head follows from slot 8.
enum ParamSlot : std::size_t {
    kConv1Kernel = 0,
    kConv1Bias,
    kConv2Kernel,
    kConv2Bias,
    kBnGamma,
    kBnBeta,
    kDense1Kernel,
    kDense1Bias,
    kHeadStart,
};

struct DenseLayer {
    std::size_t kernel_slot;
    std::size_t bias_slot;
    int in;
    int out;
};

// Hidden dense layers (relu + dropout) and the linear head, in order.
std::vector<DenseLayer> hidden_layers(const Architecture& arch);
DenseLayer head_layer(const Architecture& arch);

template <class Real>
struct BasicModel {
    Architecture arch;
    std::vector<std::vector<Real>> params;  // ordered as arch.parameter_specs()
    std::vector<Real> running_mean;
    std::vector<Real> running_var;
    NormalizationParams input_norm;  // applied by predict()/embed() to raw patch values
    ClassCatalog catalog;

    std::size_t trainable_count() const;
};

using Model = BasicModel<float>;

// Zero weights, unit BN scale, running mean 0 / var 1, identity input norm.
template <class Real>
BasicModel<Real> zero_model(const Architecture& arch);

// Glorot-uniform kernels, zero biases, gamma 1 / beta 0.
Model init_model(const Architecture& arch, std::uint64_t seed);

template <class To, class From>
BasicModel<To> convert_model(const BasicModel<From>& model) {
    BasicModel<To> out;
    out.arch = model.arch;
    for (const auto& p : model.params) out.params.emplace_back(p.begin(), p.end());
    out.running_mean.assign(model.running_mean.begin(), model.running_mean.end());
    out.running_var.assign(model.running_var.begin(), model.running_var.end());
    out.input_norm = model.input_norm;
    out.catalog = model.catalog;
    return out;
}

// Bitwise equality of architecture, parameters, running stats, normalization, catalog.
bool identical(const Model& a, const Model& b);

// --- layers ------------------------------------------------------------------

// Multiplicative noise ~ Normal(1, rate / (1 - rate)). Requires 0 <= rate < 1.
template <class Real>
std::vector<Real> sample_gaussian_noise(std::size_t count, double rate, Rng& rng);

// In train mode multiplies each activation by fresh noise; identity in eval mode.
template <class Real>
void gaussian_dropout(std::span<Real> activations, double rate, Mode mode, Rng& rng);

template <class Real>
struct BatchNormOutput {
    std::vector<Real> output;
    std::vector<Real> xhat;
    std::vector<Real> mean;  // statistics actually used
    std::vector<Real> var;
};

// Per-channel normalization of `rows x channels` activations. In train mode
// the statistics are the biased batch moments and at least two batch samples
// are required (`batch` counts samples, each contributing rows/batch rows).
template <class Real>
BatchNormOutput<Real> batchnorm(std::span<const Real> x, std::size_t rows, std::size_t channels, int batch,
                                std::span<const Real> gamma, std::span<const Real> beta,
                                std::span<const Real> running_mean, std::span<const Real> running_var, Mode mode,
                                double epsilon = 1e-5);

// running = momentum * running + (1 - momentum) * batch; the variance uses the
// unbiased batch estimate.
template <class Real>
void update_running_stats(std::span<Real> running_mean, std::span<Real> running_var, std::span<const Real> batch_mean,
                          std::span<const Real> batch_var, std::size_t rows, double momentum = 0.99);

// --- forward / backward --------------------------------------------------------

template <class Real>
struct DropoutNoise {
    std::vector<std::vector<Real>> layers;  // one batch x units buffer per hidden dense layer
};

template <class Real>
DropoutNoise<Real> sample_dropout_noise(const Architecture& arch, int batch, Rng& rng);

template <class Real>
struct ForwardCache {
    Mode mode = Mode::eval;
    int batch = 0;
    std::vector<Real> input;  // (batch * 9) x C
    std::vector<Real> z1, a1;  // conv1 pre/post activation
    std::vector<Real> z2, a2;  // conv2
    BatchNormOutput<Real> bn;
    std::vector<std::vector<Real>> hidden_z, hidden_a, hidden_out;
    DropoutNoise<Real> noise;
    std::vector<Real> head;   // logits (classifier) or raw embedding
    std::vector<Real> norms;  // embedding only
    std::vector<Real> output;  // logits or unit-norm embeddings, batch x K
};

// `inputs` is batch x 3 x 3 x C, already normalized. Train mode requires
// batch >= 2 and the dropout noise to apply.
template <class Real>
ForwardCache<Real> forward(const BasicModel<Real>& model, std::span<const Real> inputs, int batch, Mode mode,
                           const DropoutNoise<Real>* noise = nullptr);

// The values the loss sees: the classifier's logits, or scale * unit
// embedding for the embedding variant.
template <class Real>
std::vector<Real> training_logits(const BasicModel<Real>& model, const ForwardCache<Real>& cache);

template <class Real>
struct LossResult {
    Real loss = 0;
    std::vector<Real> grad;  // d loss / d logits, batch x K
};

// Mean softmax cross-entropy with max subtraction; grad = (softmax - onehot) / B.
template <class Real>
LossResult<Real> softmax_cross_entropy(std::span<const Real> logits, int batch, int classes, std::span<const int> labels);

template <class Real>
struct Gradients {
    Real loss = 0;
    std::vector<std::vector<Real>> params;  // same layout as BasicModel::params
};

// Exact gradients of the mean loss for the batch cached by a train-mode
// forward pass (noise and batch as sampled there; BN statistics are
// differentiated through).
template <class Real>
Gradients<Real> backward(const BasicModel<Real>& model, const ForwardCache<Real>& cache, std::span<const int> labels);

template <class Real>
Real batch_loss(const BasicModel<Real>& model, std::span<const Real> inputs, int batch, std::span<const int> labels,
                Mode mode, const DropoutNoise<Real>* noise = nullptr);

// --- inference -----------------------------------------------------------------

struct Prediction {
    int classes = 0;
    std::vector<int> labels;           // argmax, ties to the lowest index
    std::vector<float> probabilities;  // count x classes
};

// Raw (unnormalized) 3x3xC values, count patches back to back.
Prediction predict(const Model& model, std::span<const float> raw_values, std::size_t count);
Prediction predict(const Model& model, const std::vector<const Patch*>& patches);

// Unit vectors from an embedding-variant model, count x K.
std::vector<float> embed(const Model& model, std::span<const float> raw_values, std::size_t count);

std::vector<float> normalize_inputs(const Model& model, std::span<const float> raw_values);

// Softmax argmax with ties to the lowest index.
template <class Real>
int argmax(std::span<const Real> row);

// --- checkpoints -----------------------------------------------------------------

void save_model(const Model& model, const std::filesystem::path& path);
// With `expected` set, a checkpoint of a different variant is a compatibility error.
Model load_model(const std::filesystem::path& path, std::optional<Variant> expected = std::nullopt);

}  // namespace lulc
