#pragma once

#include "lulc/embedding.hpp"
#include "lulc/metrics.hpp"
#include "lulc/nn.hpp"
#include "lulc/patchset.hpp"
#include "lulc/raster.hpp"
#include "lulc/synth.hpp"
#include "lulc/train.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lulc {

// The 13 baseline channels in stacking order.
std::vector<ChannelDesc> baseline_channels();
std::vector<std::string> baseline_channel_order();

// Six reflectance bands, NDVI, NDWI and five terrain channels. NDWI is
// (NIR - SWIR) / (NIR + SWIR), negated with `ndwi_flip`. A pixel with nodata
// in any spectral band is nodata in every spectral and index channel; terrain
// channels are nodata wherever the 3x3 DEM neighborhood touches nodata.
RasterStack build_stack(const SceneBands& bands, bool ndwi_flip = false, double cell_size = 30.0,
                        float nodata = kDefaultNodata);

struct PatchOptions {
    bool balance = true;
    SplitRatios ratios;
    std::uint64_t seed = 0;
};

// extract -> balance -> split.
PatchSet make_patchset(const RasterStack& stack, const LabelRaster& labels, const ClassCatalog& catalog,
                       const PatchOptions& options);

struct SplitEvaluation {
    Evaluation eval;
    ConfusionMatrix confusion;
    ClassReport report;
};

SplitEvaluation evaluate_split(const Model& model, const PatchSet& patches, Split split);

// Writes <prefix>confusion.csv, <prefix>report.csv and <prefix>report.txt in `dir`.
void write_evaluation(const SplitEvaluation& result, const std::filesystem::path& dir, const std::string& prefix = "");

// Dense map: every interior pixel gets the class of its centered 3x3 window;
// the 1-pixel border and windows touching nodata get the sentinel.
struct ClassMap {
    LabelRaster ids;                 // class ids
    Grid<std::uint16_t> indices;     // class indices
};

ClassMap predict_map(const Model& model, const RasterStack& stack);

// Chooses the patch set a training run sees: the coarse relabeling under a
// mapping, or the binary subset for one group.
PatchSet training_view(const PatchSet& patches, const std::optional<GroupMapping>& mapping,
                       const std::optional<std::string>& fine_grain_group);

// Fixed-precision formatting for summary lines.
std::string fixed(double value, int digits = 4);

}  // namespace lulc
