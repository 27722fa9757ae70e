#pragma once

#include "lulc/raster.hpp"

#include <vector>

namespace lulc {

// Digital elevation model in meters. Columns run east, rows run south.
struct DemGrid {
    int width = 0;
    int height = 0;
    std::vector<double> elevation;
    double cell_size = 30.0;

    DemGrid() = default;
    DemGrid(int w, int h, double cell, double fill = 0.0)
        : width(w), height(h), elevation(static_cast<std::size_t>(w) * h, fill), cell_size(cell) {}

    double at(int x, int y) const { return elevation[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return elevation[static_cast<std::size_t>(y) * width + x]; }

    static DemGrid from_band(const Band& band, double cell_size);
};

void validate(const DemGrid& dem);

// Local surface z ~ z0 + p X + q Y + r X^2/2 + s X Y + t Y^2/2, with X east
// and Y south in meters, from the Evans-Young nine-point stencil.
struct SurfaceCoefficients {
    double z0 = 0.0;
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;
    double s = 0.0;
    double t = 0.0;
};

SurfaceCoefficients fit_local_quadratic(const DemGrid& dem, int x, int y);

inline constexpr double kFlatAspect = -1.0;
inline constexpr double kTerrainNodata = kDefaultNodata;

// Degrees in [0, 90); border pixels receive `nodata`.
Grid<double> slope(const DemGrid& dem, double nodata = kTerrainNodata);

// Compass direction of steepest descent, degrees in [0, 360), 0 = north,
// clockwise. Flat pixels (slope < 1e-6 degrees) get kFlatAspect.
Grid<double> aspect(const DemGrid& dem, double nodata = kTerrainNodata);

// Units 1/m. Sign follows the closed-form expressions:
//   profile    = -(p^2 r + 2pqs + q^2 t) / ((p^2+q^2)(1+p^2+q^2)^{3/2})
//   tangential = -(q^2 r - 2pqs + p^2 t) / ((p^2+q^2)(1+p^2+q^2)^{1/2})
// so a concave (bowl) surface is negative and a convex (dome) surface is
// positive. 0 where p^2 + q^2 < 1e-12.
struct Curvatures {
    Grid<double> profile;
    Grid<double> tangential;
};

Curvatures curvatures(const DemGrid& dem, double nodata = kTerrainNodata);

// DEM, slope, aspect, tangential curvature, profile curvature.
std::vector<NamedBand> terrain_bands(const DemGrid& dem, float nodata = kDefaultNodata);
RasterStack terrain_stack(const DemGrid& dem, float nodata = kDefaultNodata);

}  // namespace lulc
