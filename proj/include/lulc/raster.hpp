#pragma once

#include "lulc/catalog.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lulc {

inline constexpr float kDefaultNodata = -9999.0f;
inline constexpr std::uint16_t kNodataLabel = 65535;

// Row-major single-band grid.
template <class T>
struct Grid {
    int width = 0;
    int height = 0;
    std::vector<T> values;

    Grid() = default;
    Grid(int w, int h, T fill = T{}) : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

    std::size_t size() const { return values.size(); }
    T& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    const T& at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const Grid&) const = default;
};

using Band = Grid<float>;

enum class ChannelKind { spectral, index, terrain };

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& text);

struct ChannelDesc {
    std::string name;
    ChannelKind kind = ChannelKind::spectral;
    std::string units;

    bool operator==(const ChannelDesc&) const = default;
};

// width x height x C values, band-sequential: index = c*W*H + y*W + x.
struct RasterStack {
    int width = 0;
    int height = 0;
    std::vector<ChannelDesc> channels;
    std::vector<float> data;
    float nodata = kDefaultNodata;
    std::string crs;  // opaque, carried through untouched

    std::size_t channel_count() const { return channels.size(); }
    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

    std::span<const float> channel(std::size_t c) const {
        return {data.data() + c * pixel_count(), pixel_count()};
    }
    std::span<float> channel(std::size_t c) { return {data.data() + c * pixel_count(), pixel_count()}; }

    float at(std::size_t c, int x, int y) const {
        return data[c * pixel_count() + static_cast<std::size_t>(y) * width + x];
    }

    Band band(std::size_t c) const;
    std::optional<std::size_t> find_channel(const std::string& name) const;
    bool is_nodata(float v) const;

    bool operator==(const RasterStack& other) const;
};

// Throws on any violated structural invariant.
void validate(const RasterStack& stack);

struct LabelRaster {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> labels;

    LabelRaster() = default;
    LabelRaster(int w, int h, std::uint16_t fill = kNodataLabel)
        : width(w), height(h), labels(static_cast<std::size_t>(w) * h, fill) {}

    std::uint16_t at(int x, int y) const { return labels[static_cast<std::size_t>(y) * width + x]; }
    std::uint16_t& at(int x, int y) { return labels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const LabelRaster&) const = default;
};

void validate(const LabelRaster& labels, const ClassCatalog& catalog);

struct NormalizationParams {
    std::vector<double> mean;
    std::vector<double> sd;

    std::size_t size() const { return mean.size(); }
    bool operator==(const NormalizationParams&) const = default;
};

// --- band math ---------------------------------------------------------------

// (nir - red) / (nir + red); 0 where |nir + red| < 1e-12.
Band compute_ndvi(const Band& nir, const Band& red);
// (nir - swir) / (nir + swir), same zero-denominator guard.
Band compute_ndwi(const Band& nir, const Band& swir);
Band normalized_difference(const Band& a, const Band& b);

struct NamedBand {
    ChannelDesc desc;
    Band grid;
};

RasterStack stack_channels(std::span<const NamedBand> bands, std::span<const std::string> order,
                           float nodata = kDefaultNodata);

// --- normalization -----------------------------------------------------------

// Population mean/sd per channel over selected, non-nodata pixels. A channel
// with zero variance gets sd = 1.
NormalizationParams fit_normalization(const RasterStack& stack, std::span<const std::uint8_t> mask = {});

// Same statistic over row-major samples x channels values.
NormalizationParams fit_normalization(std::span<const float> samples, std::size_t channels,
                                      std::optional<float> nodata = std::nullopt);

RasterStack apply_normalization(const RasterStack& stack, const NormalizationParams& params);

// --- files -------------------------------------------------------------------

// A file pair: JSON header at `path`, raw little-endian data next to it with
// the extension replaced by ".raw".
std::filesystem::path data_path_for(const std::filesystem::path& header_path);

RasterStack read_stack(const std::filesystem::path& path);
void write_stack(const RasterStack& stack, const std::filesystem::path& path);

LabelRaster read_labels(const std::filesystem::path& path);
void write_labels(const LabelRaster& labels, const std::filesystem::path& path);

}  // namespace lulc
