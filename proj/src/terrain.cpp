#include "lulc/terrain.hpp"

#include "lulc/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace lulc {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr double kFlatSlopeDegrees = 1e-6;
constexpr double kGradientGuard = 1e-12;

bool interior(const DemGrid& dem, int x, int y) {
    return x >= 1 && y >= 1 && x + 1 < dem.width && y + 1 < dem.height;
}

template <class F>
Grid<double> map_interior(const DemGrid& dem, double nodata, F&& f) {
    validate(dem);
    Grid<double> out(dem.width, dem.height, nodata);
    for (int y = 1; y + 1 < dem.height; ++y) {
        for (int x = 1; x + 1 < dem.width; ++x) out.at(x, y) = f(fit_local_quadratic(dem, x, y));
    }
    return out;
}

double slope_degrees(const SurfaceCoefficients& c) { return std::atan(std::hypot(c.p, c.q)) * kRadToDeg; }

Band to_band(const Grid<double>& g) {
    Band b(g.width, g.height);
    for (std::size_t i = 0; i < g.values.size(); ++i) b.values[i] = static_cast<float>(g.values[i]);
    return b;
}

}  // namespace

DemGrid DemGrid::from_band(const Band& band, double cell_size) {
    DemGrid dem(band.width, band.height, cell_size);
    for (std::size_t i = 0; i < band.values.size(); ++i) dem.elevation[i] = band.values[i];
    return dem;
}

void validate(const DemGrid& dem) {
    if (!(dem.cell_size > 0.0)) fail(ErrorKind::config, "DEM cell size must be positive");
    if (dem.width < 3 || dem.height < 3) fail(ErrorKind::shape, "DEM must be at least 3x3");
    if (dem.elevation.size() != static_cast<std::size_t>(dem.width) * dem.height) {
        fail(ErrorKind::shape, "DEM elevation count does not match its dimensions");
    }
}

SurfaceCoefficients fit_local_quadratic(const DemGrid& dem, int x, int y) {
    if (!interior(dem, x, y)) {
        fail(ErrorKind::neighborhood, "pixel (" + std::to_string(x) + ", " + std::to_string(y) +
                                          ") has no full 3x3 neighborhood");
    }
    // z(dx, dy) with dx east, dy south.
    auto z = [&](int dx, int dy) { return dem.at(x + dx, y + dy); };
    const double h = dem.cell_size;

    SurfaceCoefficients c;
    c.z0 = z(0, 0);
    double east = 0.0, south = 0.0, xx = 0.0, yy = 0.0;
    for (int d = -1; d <= 1; ++d) {
        east += z(1, d) - z(-1, d);
        south += z(d, 1) - z(d, -1);
        xx += z(1, d) + z(-1, d) - 2.0 * z(0, d);
        yy += z(d, 1) + z(d, -1) - 2.0 * z(d, 0);
    }
    c.p = east / (6.0 * h);
    c.q = south / (6.0 * h);
    c.r = xx / (3.0 * h * h);
    c.t = yy / (3.0 * h * h);
    c.s = (z(1, 1) + z(-1, -1) - z(1, -1) - z(-1, 1)) / (4.0 * h * h);
    return c;
}

Grid<double> slope(const DemGrid& dem, double nodata) { return map_interior(dem, nodata, slope_degrees); }

Grid<double> aspect(const DemGrid& dem, double nodata) {
    return map_interior(dem, nodata, [](const SurfaceCoefficients& c) {
        if (slope_degrees(c) < kFlatSlopeDegrees) return kFlatAspect;
        // Downslope is -grad z; its east component is -p, its north component
        // is +q because q is the southward derivative.
        double deg = std::atan2(-c.p, c.q) * kRadToDeg;
        if (deg < 0.0) deg += 360.0;
        if (deg >= 360.0) deg -= 360.0;
        return deg;
    });
}

Curvatures curvatures(const DemGrid& dem, double nodata) {
    Curvatures out;
    out.profile = map_interior(dem, nodata, [](const SurfaceCoefficients& c) {
        const double g = c.p * c.p + c.q * c.q;
        if (g < kGradientGuard) return 0.0;
        const double num = c.p * c.p * c.r + 2.0 * c.p * c.q * c.s + c.q * c.q * c.t;
        return -num / (g * std::pow(1.0 + g, 1.5));
    });
    out.tangential = map_interior(dem, nodata, [](const SurfaceCoefficients& c) {
        const double g = c.p * c.p + c.q * c.q;
        if (g < kGradientGuard) return 0.0;
        const double num = c.q * c.q * c.r - 2.0 * c.p * c.q * c.s + c.p * c.p * c.t;
        return -num / (g * std::sqrt(1.0 + g));
    });
    return out;
}

std::vector<NamedBand> terrain_bands(const DemGrid& dem, float nodata) {
    validate(dem);
    Band elevation(dem.width, dem.height);
    for (std::size_t i = 0; i < dem.elevation.size(); ++i) elevation.values[i] = static_cast<float>(dem.elevation[i]);
    auto curv = curvatures(dem, nodata);
    std::vector<NamedBand> bands;
    bands.push_back({{"Relief DEM", ChannelKind::terrain, "m"}, std::move(elevation)});
    bands.push_back({{"Relief Slope", ChannelKind::terrain, "degrees"}, to_band(slope(dem, nodata))});
    bands.push_back({{"Relief Aspect", ChannelKind::terrain, "degrees"}, to_band(aspect(dem, nodata))});
    bands.push_back({{"Relief Tangential Curvature", ChannelKind::terrain, "1/m"}, to_band(curv.tangential)});
    bands.push_back({{"Relief Profile Curvature", ChannelKind::terrain, "1/m"}, to_band(curv.profile)});
    return bands;
}

RasterStack terrain_stack(const DemGrid& dem, float nodata) {
    const auto bands = terrain_bands(dem, nodata);
    std::vector<std::string> order;
    for (const auto& b : bands) order.push_back(b.desc.name);
    return stack_channels(bands, order, nodata);
}

}  // namespace lulc
