#pragma once

#include "lulc/catalog.hpp"
#include "lulc/raster.hpp"
#include "lulc/terrain.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace lulc {

// Classes are Gaussian clusters in channel space laid out as rectangular
// regions on a grid. Well-separated class means sit on orthogonal axes with
// pairwise distance `separation * noise_sd`; the second class of a confusable
// pair sits `confusable_offset * noise_sd` from the first.
struct SynthSpec {
    int classes = 4;
    int channels = 13;
    int region_width = 45;
    int region_height = 45;
    int region_columns = 0;  // 0: ceil(sqrt(classes))
    double separation = 10.0;
    double noise_sd = 1.0;
    double confusable_offset = 0.25;
    std::vector<std::pair<int, int>> confusable;  // class index pairs (a, b)
    std::uint64_t seed = 0;
};

void validate(const SynthSpec& spec);

struct SynthFixture {
    RasterStack stack;
    LabelRaster labels;
    ClassCatalog catalog;             // ids 1..classes
    std::vector<std::vector<double>> means;  // per class, per channel
};

SynthFixture synthesize(const SynthSpec& spec);

// Raw inputs for stack building: six reflectance bands and a DEM.
struct SceneBands {
    Band blue, green, red, nir, swir1, swir2;
    Band dem;
};

SceneBands synth_scene(int width, int height, std::uint64_t seed);

}  // namespace lulc
