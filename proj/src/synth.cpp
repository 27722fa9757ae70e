#include "lulc/synth.hpp"

#include "lulc/error.hpp"
#include "lulc/rng.hpp"

#include <cmath>
#include <string>

namespace lulc {

void validate(const SynthSpec& spec) {
    if (spec.classes < 2) fail(ErrorKind::config, "synthetic fixture needs at least 2 classes");
    if (spec.channels < 1) fail(ErrorKind::config, "synthetic fixture needs at least 1 channel");
    if (spec.classes > spec.channels) {
        fail(ErrorKind::config, "class count " + std::to_string(spec.classes) + " exceeds channel count " +
                                    std::to_string(spec.channels) + " (means need orthogonal axes)");
    }
    if (spec.region_width < 3 || spec.region_height < 3) {
        fail(ErrorKind::config, "regions must be at least 3x3 pixels");
    }
    if (spec.region_columns < 0) fail(ErrorKind::config, "region column count must be nonnegative");
    if (!(spec.noise_sd > 0.0) || spec.separation < 0.0 || spec.confusable_offset < 0.0) {
        fail(ErrorKind::config, "noise must be positive and separations nonnegative");
    }
    std::vector<int> used(spec.classes, 0);
    for (auto [a, b] : spec.confusable) {
        if (a < 0 || b < 0 || a >= spec.classes || b >= spec.classes || a == b) {
            fail(ErrorKind::config, "confusable pair references an invalid class");
        }
        if (used[a]++ || used[b]++) fail(ErrorKind::config, "a class may appear in at most one confusable pair");
    }
}

SynthFixture synthesize(const SynthSpec& spec) {
    validate(spec);
    const int columns = spec.region_columns > 0 ? spec.region_columns
                                                : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(spec.classes))));
    const int rows = (spec.classes + columns - 1) / columns;
    const int width = columns * spec.region_width;
    const int height = rows * spec.region_height;

    SynthFixture out;
    out.catalog = ClassCatalog::numbered(spec.classes);
    const double axis = spec.separation * spec.noise_sd / std::sqrt(2.0);
    out.means.assign(spec.classes, std::vector<double>(spec.channels, 0.0));
    for (int k = 0; k < spec.classes; ++k) out.means[k][k] = axis;
    for (auto [a, b] : spec.confusable) {
        out.means[b] = out.means[a];
        out.means[b][b] += spec.confusable_offset * spec.noise_sd;
    }

    out.labels = LabelRaster(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const int k = (y / spec.region_height) * columns + x / spec.region_width;
            if (k < spec.classes) out.labels.at(x, y) = static_cast<std::uint16_t>(out.catalog[k].id);
        }
    }

    auto& stack = out.stack;
    stack.width = width;
    stack.height = height;
    for (int c = 0; c < spec.channels; ++c) stack.channels.push_back({"synth " + std::to_string(c), ChannelKind::spectral, ""});
    stack.data.assign(stack.pixel_count() * spec.channels, stack.nodata);
    Rng rng(spec.seed);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const auto label = out.labels.at(x, y);
            if (label == kNodataLabel) continue;
            const auto& mean = out.means[out.catalog.require_index(label)];
            for (int c = 0; c < spec.channels; ++c) {
                stack.data[c * stack.pixel_count() + static_cast<std::size_t>(y) * width + x] =
                    static_cast<float>(rng.normal(mean[c], spec.noise_sd));
            }
        }
    }
    return out;
}

SceneBands synth_scene(int width, int height, std::uint64_t seed) {
    if (width < 3 || height < 3) fail(ErrorKind::config, "scene must be at least 3x3 pixels");
    Rng rng(seed);
    SceneBands s;
    for (Band* b : {&s.blue, &s.green, &s.red, &s.nir, &s.swir1, &s.swir2, &s.dem}) *b = Band(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            // Vegetated to the west, bare to the east, on a gentle dome.
            const double veg = 1.0 - static_cast<double>(x) / std::max(1, width - 1);
            auto noisy = [&](double v) { return static_cast<float>(std::max(0.0, v + rng.normal(0.0, 0.005))); };
            s.blue.at(x, y) = noisy(0.04 + 0.04 * (1 - veg));
            s.green.at(x, y) = noisy(0.07 + 0.04 * (1 - veg));
            s.red.at(x, y) = noisy(0.05 + 0.15 * (1 - veg));
            s.nir.at(x, y) = noisy(0.35 * veg + 0.2 * (1 - veg));
            s.swir1.at(x, y) = noisy(0.15 * veg + 0.3 * (1 - veg));
            s.swir2.at(x, y) = noisy(0.08 * veg + 0.25 * (1 - veg));
            const double dx = x - width / 2.0, dy = y - height / 2.0;
            s.dem.at(x, y) = static_cast<float>(1500.0 - 0.5 * (dx * dx + dy * dy));
        }
    }
    return s;
}

}  // namespace lulc
