#include "detail/binary_io.hpp"
#include "detail/json_io.hpp"
#include "lulc/error.hpp"
#include "lulc/nn.hpp"

namespace lulc {

namespace {

using detail::json;

constexpr const char* kFormat = "lulc-checkpoint";
constexpr int kVersion = 1;

json descriptor_json(const Architecture& arch) {
    json layers = json::array({
        {{"type", "conv1x1"}, {"filters", Architecture::conv1_filters}, {"activation", "relu"}},
        {{"type", "conv1x1"}, {"filters", Architecture::conv2_filters}, {"activation", "relu"}},
        {{"type", "batchnorm"}, {"epsilon", arch.bn_epsilon}},
        {{"type", "flatten"}, {"units", arch.flat_size()}},
    });
    for (const auto& l : hidden_layers(arch)) {
        layers.push_back({{"type", "dense"}, {"units", l.out}, {"activation", "relu"}, {"gaussian_dropout", arch.dropout_rate}});
    }
    if (arch.variant == Variant::classifier) {
        layers.push_back({{"type", "dense"}, {"units", arch.classes}, {"activation", "softmax"}});
    } else {
        layers.push_back({{"type", "dense"}, {"units", arch.classes}, {"activation", "l2_normalize"}});
    }
    return {{"input_shape", {kPatchSize, kPatchSize, arch.channels}},
            {"channels", arch.channels},
            {"classes", arch.classes},
            {"variant", to_string(arch.variant)},
            {"dropout_rate", arch.dropout_rate},
            {"embedding_scale", arch.embedding_scale},
            {"bn_epsilon", arch.bn_epsilon},
            {"layers", std::move(layers)}};
}

struct ManifestEntry {
    std::string name;
    std::vector<int> shape;
    std::size_t size;
};

std::vector<ManifestEntry> manifest_for(const Architecture& arch) {
    std::vector<ManifestEntry> out;
    for (const auto& s : arch.parameter_specs()) out.push_back({s.name, s.shape, s.size()});
    out.push_back({"bn.running_mean", {Architecture::conv2_filters}, Architecture::conv2_filters});
    out.push_back({"bn.running_var", {Architecture::conv2_filters}, Architecture::conv2_filters});
    return out;
}

}  // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
    const auto manifest = manifest_for(model.arch);
    if (model.params.size() + 2 != manifest.size()) fail(ErrorKind::shape, "model parameters do not match its architecture");
    std::vector<std::uint8_t> blob;
    json tensors = json::array();
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& data = i < model.params.size() ? model.params[i]
                           : i == model.params.size() ? model.running_mean
                                                      : model.running_var;
        if (data.size() != manifest[i].size) fail(ErrorKind::shape, "tensor " + manifest[i].name + " has the wrong size");
        tensors.push_back({{"name", manifest[i].name},
                           {"shape", manifest[i].shape},
                           {"offset", blob.size()},
                           {"trainable", i < model.params.size()}});
        detail::append_le<float>(blob, data);
    }
    json norm = {{"mean", model.input_norm.mean}, {"sd", model.input_norm.sd}};
    json doc = {{"format", kFormat},
                {"version", kVersion},
                {"dtype", "f32le"},
                {"descriptor", descriptor_json(model.arch)},
                {"tensors", std::move(tensors)},
                {"blob_bytes", blob.size()},
                {"trainable_parameters", model.arch.trainable_count()},
                {"input_normalization", std::move(norm)},
                {"catalog", detail::catalog_to_json(model.catalog)}};
    detail::write_bytes(data_path_for(path), blob);
    detail::write_json(doc, path);
}

Model load_model(const std::filesystem::path& path, std::optional<Variant> expected) {
    const auto doc = detail::read_json(path);
    const std::string what = path.string();
    if (detail::field<std::string>(doc, "format", what) != kFormat) fail(ErrorKind::format, what + ": not a checkpoint");
    if (detail::field<int>(doc, "version", what) != kVersion) fail(ErrorKind::format, what + ": unsupported version");
    if (detail::field<std::string>(doc, "dtype", what) != "f32le") fail(ErrorKind::format, what + ": unknown dtype");

    const auto& desc = doc.at("descriptor");
    Architecture arch;
    arch.channels = detail::field<int>(desc, "channels", what);
    arch.classes = detail::field<int>(desc, "classes", what);
    try {
        arch.variant = variant_from_string(detail::field<std::string>(desc, "variant", what));
    } catch (const Error& e) {
        fail(ErrorKind::format, what + ": " + e.what());
    }
    arch.dropout_rate = detail::field<double>(desc, "dropout_rate", what);
    arch.embedding_scale = detail::field<double>(desc, "embedding_scale", what);
    arch.bn_epsilon = detail::field<double>(desc, "bn_epsilon", what);
    if (expected && *expected != arch.variant) {
        fail(ErrorKind::compatibility, what + " is a " + to_string(arch.variant) + " checkpoint, expected " +
                                           to_string(*expected));
    }

    Model model = zero_model<float>(arch);
    const auto manifest = manifest_for(arch);
    const auto& tensors = doc.at("tensors");
    if (!tensors.is_array() || tensors.size() != manifest.size()) fail(ErrorKind::format, what + ": tensor manifest mismatch");

    const auto bytes = detail::read_bytes(data_path_for(path));
    const auto blob_bytes = detail::field<std::size_t>(doc, "blob_bytes", what);
    if (bytes.size() != blob_bytes) {
        fail(ErrorKind::format, what + ": blob holds " + std::to_string(bytes.size()) + " bytes, header declares " +
                                    std::to_string(blob_bytes));
    }
    detail::ByteReader reader(bytes, data_path_for(path).string());
    std::size_t offset = 0;
    for (std::size_t i = 0; i < manifest.size(); ++i) {
        const auto& t = tensors[i];
        if (detail::field<std::string>(t, "name", what) != manifest[i].name ||
            detail::field<std::vector<int>>(t, "shape", what) != manifest[i].shape ||
            detail::field<std::size_t>(t, "offset", what) != offset) {
            fail(ErrorKind::format, what + ": tensor " + std::to_string(i) + " does not match the architecture");
        }
        auto values = reader.take<float>(manifest[i].size);
        offset += manifest[i].size * sizeof(float);
        if (i < model.params.size()) {
            model.params[i] = std::move(values);
        } else if (i == model.params.size()) {
            model.running_mean = std::move(values);
        } else {
            model.running_var = std::move(values);
        }
    }
    reader.expect_end();
    for (float v : model.running_var) {
        if (!(v > 0.0f)) fail(ErrorKind::format, what + ": running variance must be positive");
    }

    const auto& norm = doc.at("input_normalization");
    model.input_norm.mean = detail::field<std::vector<double>>(norm, "mean", what);
    model.input_norm.sd = detail::field<std::vector<double>>(norm, "sd", what);
    if (model.input_norm.mean.size() != static_cast<std::size_t>(arch.channels) ||
        model.input_norm.sd.size() != static_cast<std::size_t>(arch.channels)) {
        fail(ErrorKind::format, what + ": normalization does not match channel count");
    }
    model.catalog = detail::catalog_from_json(doc.at("catalog"), what);
    if (model.catalog.size() != static_cast<std::size_t>(arch.classes)) fail(ErrorKind::format, what + ": catalog size mismatch");
    return model;
}

}  // namespace lulc
