#include "lulc/raster.hpp"

#include "detail/binary_io.hpp"
#include "detail/json_io.hpp"
#include "lulc/error.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <set>

namespace lulc {

namespace {

constexpr double kDenominatorEpsilon = 1e-12;

void require_same_shape(const Band& a, const Band& b, const char* what) {
    if (a.width != b.width || a.height != b.height || a.values.size() != b.values.size()) {
        fail(ErrorKind::shape, std::string(what) + ": grids differ in size (" + std::to_string(a.width) + "x" +
                                   std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                   std::to_string(b.height) + ")");
    }
}

bool same_bits(float a, float b) { return std::bit_cast<std::uint32_t>(a) == std::bit_cast<std::uint32_t>(b); }

}  // namespace

std::string to_string(ChannelKind kind) {
    switch (kind) {
        case ChannelKind::spectral: return "spectral";
        case ChannelKind::index: return "index";
        case ChannelKind::terrain: return "terrain";
    }
    return "spectral";
}

ChannelKind channel_kind_from_string(const std::string& text) {
    if (text == "spectral") return ChannelKind::spectral;
    if (text == "index") return ChannelKind::index;
    if (text == "terrain") return ChannelKind::terrain;
    fail(ErrorKind::format, "unknown channel kind '" + text + "'");
}

Band RasterStack::band(std::size_t c) const {
    Band out(width, height);
    const auto src = channel(c);
    std::copy(src.begin(), src.end(), out.values.begin());
    return out;
}

std::optional<std::size_t> RasterStack::find_channel(const std::string& name) const {
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (channels[c].name == name) return c;
    }
    return std::nullopt;
}

bool RasterStack::is_nodata(float v) const { return std::isnan(nodata) ? std::isnan(v) : v == nodata; }

// Bitwise comparison so NaN nodata and signed zeros compare as stored.
bool RasterStack::operator==(const RasterStack& other) const {
    if (width != other.width || height != other.height || channels != other.channels || crs != other.crs ||
        !same_bits(nodata, other.nodata) || data.size() != other.data.size()) {
        return false;
    }
    return data.empty() || std::memcmp(data.data(), other.data.data(), data.size() * sizeof(float)) == 0;
}

void validate(const RasterStack& stack) {
    if (stack.width < 3 || stack.height < 3) {
        fail(ErrorKind::shape, "stack must be at least 3x3, got " + std::to_string(stack.width) + "x" +
                                   std::to_string(stack.height));
    }
    if (stack.data.size() != stack.pixel_count() * stack.channel_count()) {
        fail(ErrorKind::shape, "stack data holds " + std::to_string(stack.data.size()) + " values, expected " +
                                   std::to_string(stack.pixel_count() * stack.channel_count()));
    }
    std::set<std::string> names;
    for (const auto& c : stack.channels) {
        if (!names.insert(c.name).second) fail(ErrorKind::catalog, "duplicate channel name '" + c.name + "'");
    }
}

void validate(const LabelRaster& labels, const ClassCatalog& catalog) {
    if (labels.labels.size() != static_cast<std::size_t>(labels.width) * labels.height) {
        fail(ErrorKind::shape, "label raster size mismatch");
    }
    for (auto id : labels.labels) {
        if (id != kNodataLabel && !catalog.index_of(id)) {
            fail(ErrorKind::catalog, "label raster contains id " + std::to_string(id) + " not in the catalog");
        }
    }
}

Band normalized_difference(const Band& a, const Band& b) {
    require_same_shape(a, b, "normalized difference");
    Band out(a.width, a.height);
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double x = a.values[i];
        const double y = b.values[i];
        const double den = x + y;
        out.values[i] = std::abs(den) < kDenominatorEpsilon ? 0.0f : static_cast<float>((x - y) / den);
    }
    return out;
}

Band compute_ndvi(const Band& nir, const Band& red) { return normalized_difference(nir, red); }

Band compute_ndwi(const Band& nir, const Band& swir) { return normalized_difference(nir, swir); }

RasterStack stack_channels(std::span<const NamedBand> bands, std::span<const std::string> order, float nodata) {
    if (order.empty()) fail(ErrorKind::catalog, "channel order is empty");
    std::set<std::string> used;
    RasterStack stack;
    stack.nodata = nodata;
    for (const auto& name : order) {
        if (!used.insert(name).second) fail(ErrorKind::catalog, "channel '" + name + "' listed twice in order");
        const NamedBand* match = nullptr;
        for (const auto& b : bands) {
            if (b.desc.name == name) {
                if (match) fail(ErrorKind::catalog, "two input grids are named '" + name + "'");
                match = &b;
            }
        }
        if (!match) fail(ErrorKind::catalog, "no input grid named '" + name + "'");
        if (stack.channels.empty()) {
            stack.width = match->grid.width;
            stack.height = match->grid.height;
        } else if (match->grid.width != stack.width || match->grid.height != stack.height) {
            fail(ErrorKind::shape, "grid '" + name + "' differs in size from the first channel");
        }
        if (match->grid.values.size() != static_cast<std::size_t>(stack.width) * stack.height) {
            fail(ErrorKind::shape, "grid '" + name + "' has inconsistent value count");
        }
        stack.channels.push_back(match->desc);
        stack.data.insert(stack.data.end(), match->grid.values.begin(), match->grid.values.end());
    }
    validate(stack);
    return stack;
}

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 1.0;
};

// Two-pass population moments in index order (deterministic).
template <class Get>
Moments channel_moments(std::size_t count, Get&& get, const std::string& what) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (auto v = get(i)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) fail(ErrorKind::empty_sample, what + ": no valid samples");
    Moments m;
    m.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        if (auto v = get(i)) {
            const double d = *v - m.mean;
            ss += d * d;
        }
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    m.sd = sd < 1e-12 ? 1.0 : sd;
    return m;
}

}  // namespace

NormalizationParams fit_normalization(const RasterStack& stack, std::span<const std::uint8_t> mask) {
    if (!mask.empty() && mask.size() != stack.pixel_count()) {
        fail(ErrorKind::shape, "normalization mask size does not match the stack");
    }
    if (!mask.empty()) {
        std::size_t selected = 0;
        for (auto m : mask) selected += m != 0;
        if (selected == 0) fail(ErrorKind::empty_sample, "normalization mask selects no pixels");
    }
    NormalizationParams params;
    for (std::size_t c = 0; c < stack.channel_count(); ++c) {
        const auto values = stack.channel(c);
        const auto m = channel_moments(
            values.size(),
            [&](std::size_t i) -> std::optional<double> {
                if (!mask.empty() && mask[i] == 0) return std::nullopt;
                if (stack.is_nodata(values[i])) return std::nullopt;
                return values[i];
            },
            "channel '" + stack.channels[c].name + "'");
        params.mean.push_back(m.mean);
        params.sd.push_back(m.sd);
    }
    return params;
}

NormalizationParams fit_normalization(std::span<const float> samples, std::size_t channels,
                                      std::optional<float> nodata) {
    if (channels == 0 || samples.size() % channels != 0) {
        fail(ErrorKind::shape, "sample buffer is not a whole number of channel vectors");
    }
    const std::size_t rows = samples.size() / channels;
    NormalizationParams params;
    for (std::size_t c = 0; c < channels; ++c) {
        const auto m = channel_moments(
            rows,
            [&](std::size_t i) -> std::optional<double> {
                const float v = samples[i * channels + c];
                if (nodata && (std::isnan(*nodata) ? std::isnan(v) : v == *nodata)) return std::nullopt;
                return v;
            },
            "channel " + std::to_string(c));
        params.mean.push_back(m.mean);
        params.sd.push_back(m.sd);
    }
    return params;
}

RasterStack apply_normalization(const RasterStack& stack, const NormalizationParams& params) {
    if (params.mean.size() != stack.channel_count() || params.sd.size() != stack.channel_count()) {
        fail(ErrorKind::shape, "normalization has " + std::to_string(params.mean.size()) +
                                   " channels, stack has " + std::to_string(stack.channel_count()));
    }
    RasterStack out = stack;
    for (std::size_t c = 0; c < stack.channel_count(); ++c) {
        auto values = out.channel(c);
        for (auto& v : values) {
            if (!stack.is_nodata(v)) v = static_cast<float>((v - params.mean[c]) / params.sd[c]);
        }
    }
    return out;
}

// --- files -------------------------------------------------------------------

std::filesystem::path data_path_for(const std::filesystem::path& header_path) {
    auto p = header_path;
    p.replace_extension(".raw");
    if (p == header_path) p += ".raw";
    return p;
}

namespace {

using detail::json;

json raster_header(int width, int height, const std::vector<ChannelDesc>& channels, const char* dtype,
                   json nodata, const std::string& crs) {
    json doc = {{"width", width},
                {"height", height},
                {"channels", detail::channels_to_json(channels)},
                {"dtype", dtype},
                {"layout", "BSQ"},
                {"nodata", std::move(nodata)}};
    if (!crs.empty()) doc["crs"] = crs;
    return doc;
}

struct ParsedHeader {
    int width;
    int height;
    std::vector<ChannelDesc> channels;
    std::string dtype;
    json nodata;
    std::string crs;
};

ParsedHeader parse_raster_header(const std::filesystem::path& path) {
    const auto doc = detail::read_json(path);
    const std::string what = path.string();
    ParsedHeader h;
    h.width = detail::field<int>(doc, "width", what);
    h.height = detail::field<int>(doc, "height", what);
    h.channels = detail::channels_from_json(doc.contains("channels") ? doc.at("channels") : json(), what);
    h.dtype = detail::field<std::string>(doc, "dtype", what);
    if (detail::field<std::string>(doc, "layout", what) != "BSQ") fail(ErrorKind::format, what + ": layout must be BSQ");
    if (!doc.contains("nodata")) fail(ErrorKind::format, what + ": missing field 'nodata'");
    h.nodata = doc.at("nodata");
    if (doc.contains("crs")) h.crs = detail::field<std::string>(doc, "crs", what);
    if (h.width <= 0 || h.height <= 0) fail(ErrorKind::format, what + ": non-positive dimensions");
    return h;
}

}  // namespace

void write_stack(const RasterStack& stack, const std::filesystem::path& path) {
    validate(stack);
    std::vector<std::uint8_t> bytes;
    bytes.reserve(stack.data.size() * sizeof(float));
    detail::append_le<float>(bytes, stack.data);
    detail::write_bytes(data_path_for(path), bytes);
    detail::write_json(
        raster_header(stack.width, stack.height, stack.channels, "f32le", detail::encode_real(stack.nodata), stack.crs),
        path);
}

RasterStack read_stack(const std::filesystem::path& path) {
    auto h = parse_raster_header(path);
    if (h.dtype != "f32le") fail(ErrorKind::format, path.string() + ": unknown dtype '" + h.dtype + "' for a stack");
    RasterStack stack;
    stack.width = h.width;
    stack.height = h.height;
    stack.channels = std::move(h.channels);
    stack.nodata = static_cast<float>(detail::decode_real(h.nodata, path.string()));
    stack.crs = std::move(h.crs);
    const auto bytes = detail::read_bytes(data_path_for(path));
    detail::ByteReader reader(bytes, data_path_for(path).string());
    stack.data = reader.take<float>(stack.pixel_count() * stack.channel_count());
    reader.expect_end();
    try {
        validate(stack);
    } catch (const Error& e) {
        fail(ErrorKind::format, path.string() + ": " + e.what());
    }
    return stack;
}

void write_labels(const LabelRaster& labels, const std::filesystem::path& path) {
    if (labels.labels.size() != static_cast<std::size_t>(labels.width) * labels.height) {
        fail(ErrorKind::shape, "label raster size mismatch");
    }
    std::vector<std::uint8_t> bytes;
    detail::append_le<std::uint16_t>(bytes, labels.labels);
    detail::write_bytes(data_path_for(path), bytes);
    detail::write_json(raster_header(labels.width, labels.height, {{"label", ChannelKind::index, "class id"}}, "u16le",
                                     kNodataLabel, ""),
                       path);
}

LabelRaster read_labels(const std::filesystem::path& path) {
    const auto h = parse_raster_header(path);
    if (h.dtype != "u16le") fail(ErrorKind::format, path.string() + ": unknown dtype '" + h.dtype + "' for labels");
    if (h.channels.size() != 1) fail(ErrorKind::format, path.string() + ": label raster must have one channel");
    if (!h.nodata.is_number_integer() || h.nodata.get<long long>() != kNodataLabel) {
        fail(ErrorKind::format, path.string() + ": label nodata must be 65535");
    }
    LabelRaster labels;
    labels.width = h.width;
    labels.height = h.height;
    const auto bytes = detail::read_bytes(data_path_for(path));
    detail::ByteReader reader(bytes, data_path_for(path).string());
    labels.labels = reader.take<std::uint16_t>(static_cast<std::size_t>(h.width) * h.height);
    reader.expect_end();
    return labels;
}

}  // namespace lulc
