#pragma once

#include "lulc/catalog.hpp"
#include "lulc/raster.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lulc {

inline constexpr int kPatchSize = 3;
inline constexpr int kPatchPixels = kPatchSize * kPatchSize;

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

const char* to_string(Split split);
Split split_from_string(const std::string& text);

// A homogeneous 3x3xC window. Values are stored height-width-channel:
// values[(y * 3 + x) * C + c].
struct Patch {
    std::vector<float> values;
    std::uint16_t label_index = 0;
    int source_x = 0;  // top-left pixel of the window
    int source_y = 0;
    Split split = Split::train;

    int channels() const { return static_cast<int>(values.size() / kPatchPixels); }
    float at(int x, int y, int c) const { return values[(static_cast<std::size_t>(y) * kPatchSize + x) * channels() + c]; }

    bool operator==(const Patch& other) const;
};

struct PatchSet {
    std::vector<ChannelDesc> channels;
    ClassCatalog catalog;
    std::vector<Patch> patches;
    std::uint64_t seed = 0;

    std::size_t size() const { return patches.size(); }
    std::size_t channel_count() const { return channels.size(); }
    std::size_t count(Split split) const;
    std::vector<std::size_t> class_counts() const;
    std::vector<std::size_t> class_counts(Split split) const;
    std::vector<const Patch*> select(Split split) const;

    bool operator==(const PatchSet&) const = default;
};

struct SplitRatios {
    double train = 0.70;
    double val = 0.15;
    double test = 0.15;
};

// Non-overlapping 3x3 windows (stride 3, anchored at (0,0)) whose 9 labels are
// identical, in the catalog, and whose stack values contain no nodata.
// Output is in row-major window order.
std::vector<Patch> extract_homogeneous(const RasterStack& stack, const LabelRaster& labels,
                                       const ClassCatalog& catalog);

// Subsamples every class without replacement down to the smallest class count.
// Surviving patches keep their input order.
std::vector<Patch> balance(const std::vector<Patch>& patches, const ClassCatalog& catalog, std::uint64_t seed);

// Stratified shuffle-then-partition with largest-remainder rounding per class.
PatchSet split(std::vector<Patch> patches, const ClassCatalog& catalog, std::vector<ChannelDesc> channels,
               std::uint64_t seed, SplitRatios ratios = {});

// Per-class split sizes under largest-remainder rounding; ties go to the
// earlier split (train, val, test).
std::array<std::size_t, 3> split_counts(std::size_t n, SplitRatios ratios);

// Dihedral transforms of the 3x3 grid: 0 identity, 1 rot90 (clockwise),
// 2 rot180, 3 rot270, 4 flip left-right, 5 flip top-bottom, 6 transpose,
// 7 anti-transpose.
inline constexpr int kTransformCount = 8;

Patch augment(const Patch& patch, int transform_id);
void augment_values(std::span<const float> in, std::span<float> out, int channels, int transform_id);

// Header JSON at `path`, payload in the sibling ".raw" file.
void write_patchset(const PatchSet& set, const std::filesystem::path& path);
PatchSet read_patchset(const std::filesystem::path& path);

}  // namespace lulc
