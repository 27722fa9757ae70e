#include "lulc/pipeline.hpp"

#include "lulc/error.hpp"
#include "lulc/terrain.hpp"

#include <cstdio>

namespace lulc {

std::vector<ChannelDesc> baseline_channels() {
    return {
        {"Lsat8 Band 2 (BLUE)", ChannelKind::spectral, "reflectance"},
        {"Lsat8 Band 3 (GREEN)", ChannelKind::spectral, "reflectance"},
        {"Lsat8 Band 4 (RED)", ChannelKind::spectral, "reflectance"},
        {"Lsat8 Band 5 (NIR near infrared)", ChannelKind::spectral, "reflectance"},
        {"Lsat8 Band 6 (SWIR Shortwave infrared)", ChannelKind::spectral, "reflectance"},
        {"Lsat8 Band 7 (SWIR 2)", ChannelKind::spectral, "reflectance"},
        {"Lsat8 NDVI", ChannelKind::index, ""},
        {"Lsat8 NDWI", ChannelKind::index, ""},
        {"Relief DEM", ChannelKind::terrain, "m"},
        {"Relief Slope", ChannelKind::terrain, "degrees"},
        {"Relief Aspect", ChannelKind::terrain, "degrees"},
        {"Relief Tangential Curvature", ChannelKind::terrain, "1/m"},
        {"Relief Profile Curvature", ChannelKind::terrain, "1/m"},
    };
}

std::vector<std::string> baseline_channel_order() {
    std::vector<std::string> order;
    for (const auto& c : baseline_channels()) order.push_back(c.name);
    return order;
}

RasterStack build_stack(const SceneBands& bands, bool ndwi_flip, double cell_size, float nodata) {
    const Band* spectral[] = {&bands.blue, &bands.green, &bands.red, &bands.nir, &bands.swir1, &bands.swir2};
    const int w = bands.dem.width, h = bands.dem.height;
    for (const Band* b : spectral) {
        if (b->width != w || b->height != h) fail(ErrorKind::shape, "all input bands must share the DEM dimensions");
    }
    auto is_nodata = [nodata](float v) { return v == nodata || std::isnan(v); };

    const auto descs = baseline_channels();
    std::vector<NamedBand> named;
    for (int i = 0; i < 6; ++i) named.push_back({descs[i], *spectral[i]});
    named.push_back({descs[6], compute_ndvi(bands.nir, bands.red)});
    named.push_back({descs[7], ndwi_flip ? compute_ndwi(bands.swir1, bands.nir) : compute_ndwi(bands.nir, bands.swir1)});

    // Terrain from a gap-free copy; contaminated neighborhoods are masked below.
    Band dem_filled = bands.dem;
    for (auto& v : dem_filled.values) {
        if (is_nodata(v)) v = 0.0f;
    }
    auto terrain = terrain_bands(DemGrid::from_band(dem_filled, cell_size), nodata);
    for (std::size_t i = 0; i < terrain.size(); ++i) named.push_back({descs[8 + i], std::move(terrain[i].grid)});

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            bool bad_spectral = false;
            for (const Band* b : spectral) bad_spectral = bad_spectral || is_nodata(b->at(x, y));
            if (bad_spectral) {
                for (int i = 0; i < 8; ++i) named[i].grid.at(x, y) = nodata;
            }
            bool bad_dem = false;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int xx = x + dx, yy = y + dy;
                    if (xx >= 0 && yy >= 0 && xx < w && yy < h && is_nodata(bands.dem.at(xx, yy))) bad_dem = true;
                }
            }
            if (bad_dem) {
                for (std::size_t i = 9; i < named.size(); ++i) named[i].grid.at(x, y) = nodata;
            }
            if (is_nodata(bands.dem.at(x, y))) named[8].grid.at(x, y) = nodata;
        }
    }
    return stack_channels(named, baseline_channel_order(), nodata);
}

PatchSet make_patchset(const RasterStack& stack, const LabelRaster& labels, const ClassCatalog& catalog,
                       const PatchOptions& options) {
    auto patches = extract_homogeneous(stack, labels, catalog);
    if (options.balance) patches = balance(patches, catalog, options.seed);
    return split(std::move(patches), catalog, stack.channels, options.seed, options.ratios);
}

SplitEvaluation evaluate_split(const Model& model, const PatchSet& patches, Split split) {
    if (model.catalog.size() != patches.catalog.size()) {
        fail(ErrorKind::compatibility, "model has " + std::to_string(model.catalog.size()) + " classes, patch set has " +
                                           std::to_string(patches.catalog.size()));
    }
    SplitEvaluation out;
    out.eval = evaluate(model, patches.select(split));
    out.confusion = confusion(out.eval.truth, out.eval.predicted, patches.catalog);
    out.report = report(out.confusion);
    return out;
}

void write_evaluation(const SplitEvaluation& result, const std::filesystem::path& dir, const std::string& prefix) {
    write_confusion_csv(result.confusion, dir / (prefix + "confusion.csv"));
    write_report_csv(result.report, dir / (prefix + "report.csv"));
    const std::string text = format_report(result.report);
    std::filesystem::create_directories(dir);
    std::FILE* f = std::fopen((dir / (prefix + "report.txt")).string().c_str(), "wb");
    if (!f) fail(ErrorKind::io, "cannot write report text in " + dir.string());
    std::fwrite(text.data(), 1, text.size(), f);
    std::fclose(f);
}

ClassMap predict_map(const Model& model, const RasterStack& stack) {
    validate(stack);
    if (stack.channel_count() != static_cast<std::size_t>(model.arch.channels)) {
        fail(ErrorKind::compatibility, "model expects " + std::to_string(model.arch.channels) + " channels, stack has " +
                                           std::to_string(stack.channel_count()));
    }
    const int w = stack.width, h = stack.height;
    const std::size_t channels = stack.channel_count();
    ClassMap out{LabelRaster(w, h), Grid<std::uint16_t>(w, h, kNodataLabel)};

    std::vector<float> row_values;
    std::vector<int> row_x;
    for (int y = 1; y + 1 < h; ++y) {
        row_values.clear();
        row_x.clear();
        for (int x = 1; x + 1 < w; ++x) {
            const std::size_t start = row_values.size();
            bool valid = true;
            for (int dy = -1; dy <= 1 && valid; ++dy) {
                for (int dx = -1; dx <= 1 && valid; ++dx) {
                    for (std::size_t c = 0; c < channels; ++c) {
                        const float v = stack.at(c, x + dx, y + dy);
                        if (stack.is_nodata(v)) {
                            valid = false;
                            break;
                        }
                        row_values.push_back(v);
                    }
                }
            }
            if (valid) {
                row_x.push_back(x);
            } else {
                row_values.resize(start);
            }
        }
        if (row_x.empty()) continue;
        const auto pred = predict(model, row_values, row_x.size());
        for (std::size_t i = 0; i < row_x.size(); ++i) {
            const int k = pred.labels[i];
            out.indices.at(row_x[i], y) = static_cast<std::uint16_t>(k);
            out.ids.at(row_x[i], y) = model.catalog[k].id;
        }
    }
    return out;
}

PatchSet training_view(const PatchSet& patches, const std::optional<GroupMapping>& mapping,
                       const std::optional<std::string>& fine_grain_group) {
    if (fine_grain_group) {
        if (!mapping) fail(ErrorKind::config, "fine-grain training needs a group mapping");
        for (const auto& g : mapping->groups) {
            if (g.id == *fine_grain_group) return fine_grain_dataset(patches, g);
        }
        fail(ErrorKind::config, "group " + *fine_grain_group + " is not in the mapping");
    }
    if (mapping) return apply_grouping(patches, *mapping);
    return patches;
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
    return buf;
}

}  // namespace lulc
