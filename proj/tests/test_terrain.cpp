#include "support.hpp"

#include "lulc/terrain.hpp"

#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

using namespace lulc;

namespace {

constexpr double kCell = 30.0;

// Elevation from a function of metric coordinates (X east, Y south).
DemGrid surface(int w, int h, const std::function<double(double, double)>& z, double cell = kCell) {
    DemGrid dem(w, h, cell);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) dem.at(x, y) = z(x * cell, y * cell);
    }
    return dem;
}

DemGrid rotate_clockwise(const DemGrid& dem) {
    DemGrid out(dem.height, dem.width, dem.cell_size);
    for (int y = 0; y < dem.height; ++y) {
        for (int x = 0; x < dem.width; ++x) out.at(dem.height - 1 - y, x) = dem.at(x, y);
    }
    return out;
}

double degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace

TEST_SUITE("terrain") {

TEST_CASE("quadratic fit on analytic surfaces") {
    const auto plane = surface(5, 5, [](double x, double) { return 2.0 * x / kCell; });
    const auto c = fit_local_quadratic(plane, 2, 2);
    CHECK(c.p == doctest::Approx(2.0 / kCell).epsilon(1e-12));
    CHECK(std::abs(c.q) < 1e-15);
    CHECK(std::abs(c.r) < 1e-15);
    CHECK(std::abs(c.s) < 1e-15);
    CHECK(std::abs(c.t) < 1e-15);

    const auto flat = fit_local_quadratic(DemGrid(3, 3, kCell, 812.0), 1, 1);
    CHECK(flat.p == 0.0);
    CHECK(flat.q == 0.0);
    CHECK(flat.r == 0.0);
    CHECK(flat.s == 0.0);
    CHECK(flat.t == 0.0);

    const auto bowl = surface(5, 5, [](double x, double y) {
        const double cx = x / kCell - 2.0, cy = y / kCell - 2.0;
        return cx * cx + cy * cy;
    });
    const auto b = fit_local_quadratic(bowl, 2, 2);
    CHECK(b.r == doctest::Approx(2.0 / (kCell * kCell)).epsilon(1e-12));
    CHECK(b.t == doctest::Approx(2.0 / (kCell * kCell)).epsilon(1e-12));
    CHECK(std::abs(b.s) < 1e-15);

    CHECK_ERROR_KIND(fit_local_quadratic(bowl, 0, 2), neighborhood);
    CHECK_ERROR_KIND(fit_local_quadratic(bowl, 2, 4), neighborhood);
}

TEST_CASE("slope examples") {
    const auto flat = slope(DemGrid(4, 4, kCell, 100.0));
    CHECK(flat.at(1, 1) == 0.0);
    CHECK(flat.at(2, 2) == 0.0);

    const auto unit = slope(surface(4, 4, [](double x, double) { return x; }));
    CHECK(unit.at(1, 2) == doctest::Approx(45.0).epsilon(1e-12));

    const double rise = std::tan(30.0 * std::numbers::pi / 180.0);
    const auto dip = slope(surface(6, 6, [rise](double x, double) { return -rise * x; }));
    for (int y = 1; y < 5; ++y) {
        for (int x = 1; x < 5; ++x) CHECK(std::abs(dip.at(x, y) - 30.0) < 1e-6);
    }
}

TEST_CASE("aspect examples") {
    const auto south = aspect(surface(5, 5, [](double, double y) { return 500.0 - 0.2 * y; }));
    CHECK(south.at(2, 2) == doctest::Approx(180.0).epsilon(1e-12));

    const auto east = aspect(surface(5, 5, [](double x, double) { return 500.0 - 0.2 * x; }));
    CHECK(std::abs(east.at(2, 2) - 90.0) < 1e-6);

    const auto north = aspect(surface(5, 5, [](double, double y) { return 0.1 * y; }));
    CHECK(north.at(2, 2) == doctest::Approx(0.0));
    const auto west = aspect(surface(5, 5, [](double x, double) { return 0.1 * x; }));
    CHECK(west.at(2, 2) == doctest::Approx(270.0));

    const auto flat = aspect(DemGrid(3, 3, kCell, 9.0));
    CHECK(flat.at(1, 1) == kFlatAspect);
}

TEST_CASE("curvature vanishes on planes and flat ground") {
    Rng rng(8);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = rng.uniform(-1, 1), b = rng.uniform(-1, 1), c0 = rng.uniform(0, 2000);
        const auto dem = surface(6, 5, [&](double x, double y) { return c0 + a * x + b * y; });
        const auto curv = curvatures(dem);
        for (int y = 1; y < 4; ++y) {
            for (int x = 1; x < 5; ++x) {
                CHECK(std::abs(curv.profile.at(x, y)) < 1e-12);
                CHECK(std::abs(curv.tangential.at(x, y)) < 1e-12);
            }
        }
    }
    const auto flat = curvatures(DemGrid(4, 4, kCell, 3.0));
    CHECK(flat.profile.at(1, 1) == 0.0);
    CHECK(flat.tangential.at(2, 2) == 0.0);
}

TEST_CASE("sphere cap curvature is minus one over the radius") {
    // Lower cap of a sphere (a bowl), radius 100 cells.
    const double radius = 100.0 * kCell;
    const int n = 41;
    const double centre = (n - 1) / 2.0 * kCell;
    const auto dem = surface(n, n, [&](double x, double y) {
        const double dx = x - centre, dy = y - centre;
        return radius - std::sqrt(radius * radius - dx * dx - dy * dy);
    });
    const auto curv = curvatures(dem);
    const double expected = -1.0 / radius;
    for (auto [x, y] : {std::pair{23, 20}, {20, 17}, {24, 23}, {17, 18}}) {
        CHECK(std::abs(curv.profile.at(x, y) - expected) < 0.05 * std::abs(expected));
        CHECK(std::abs(curv.tangential.at(x, y) - expected) < 0.05 * std::abs(expected));
    }
}

TEST_CASE("property: rotating the DEM rotates aspect and preserves slope and curvature") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        double k[5];
        for (auto& v : k) v = rng.uniform(-0.002, 0.002);
        k[0] *= 200;
        k[1] *= 200;
        const auto dem = surface(7, 5, [&](double x, double y) {
            return 1000 + k[0] * x + k[1] * y + k[2] * x * x + k[3] * x * y + k[4] * y * y;
        });
        const auto rot = rotate_clockwise(dem);
        const auto s0 = slope(dem), s1 = slope(rot);
        const auto a0 = aspect(dem), a1 = aspect(rot);
        const auto c0 = curvatures(dem), c1 = curvatures(rot);
        for (int y = 1; y < dem.height - 1; ++y) {
            for (int x = 1; x < dem.width - 1; ++x) {
                const int rx = dem.height - 1 - y, ry = x;
                CHECK(s1.at(rx, ry) == doctest::Approx(s0.at(x, y)).epsilon(1e-9));
                double turned = std::fmod(a0.at(x, y) + 90.0, 360.0);
                double diff = std::abs(a1.at(rx, ry) - turned);
                CHECK(std::min(diff, 360.0 - diff) < 1e-7);
                CHECK(c1.profile.at(rx, ry) == doctest::Approx(c0.profile.at(x, y)).epsilon(1e-7));
                CHECK(c1.tangential.at(rx, ry) == doctest::Approx(c0.tangential.at(x, y)).epsilon(1e-7));
            }
        }
    }
}

TEST_CASE("property: offsets change nothing and scaling steepens") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        DemGrid dem(6, 6, kCell);
        for (auto& v : dem.elevation) v = rng.uniform(100, 200);
        DemGrid raised = dem, steeper = dem;
        for (auto& v : raised.elevation) v += 1000.0;
        for (auto& v : steeper.elevation) v *= 3.0;
        const auto s0 = slope(dem), s1 = slope(raised), s2 = slope(steeper);
        const auto a0 = aspect(dem), a1 = aspect(raised);
        const auto c0 = curvatures(dem), c1 = curvatures(raised);
        for (int y = 1; y < 5; ++y) {
            for (int x = 1; x < 5; ++x) {
                CHECK(s1.at(x, y) == doctest::Approx(s0.at(x, y)).epsilon(1e-9));
                CHECK(a1.at(x, y) == doctest::Approx(a0.at(x, y)).epsilon(1e-9));
                CHECK(c1.profile.at(x, y) == doctest::Approx(c0.profile.at(x, y)).epsilon(1e-6));
                CHECK(c1.tangential.at(x, y) == doctest::Approx(c0.tangential.at(x, y)).epsilon(1e-6));
                const auto f0 = fit_local_quadratic(dem, x, y), f2 = fit_local_quadratic(steeper, x, y);
                CHECK(f2.p == doctest::Approx(3.0 * f0.p).epsilon(1e-9));
                CHECK(f2.q == doctest::Approx(3.0 * f0.q).epsilon(1e-9));
                if (s0.at(x, y) > 0.0) CHECK(s2.at(x, y) > s0.at(x, y));
            }
        }
    }
}

TEST_CASE("borders are nodata and the terrain stack follows channel order") {
    const auto dem = surface(5, 4, [](double x, double y) { return x + 2 * y; });
    const auto s = slope(dem, -9999.0);
    for (int x = 0; x < 5; ++x) {
        CHECK(s.at(x, 0) == -9999.0);
        CHECK(s.at(x, 3) == -9999.0);
    }
    for (int y = 0; y < 4; ++y) {
        CHECK(s.at(0, y) == -9999.0);
        CHECK(s.at(4, y) == -9999.0);
    }
    const auto stack = terrain_stack(dem);
    REQUIRE(stack.channel_count() == 5);
    CHECK(stack.channels[0].name == "Relief DEM");
    CHECK(stack.channels[1].name == "Relief Slope");
    CHECK(stack.channels[2].name == "Relief Aspect");
    CHECK(stack.channels[3].name == "Relief Tangential Curvature");
    CHECK(stack.channels[4].name == "Relief Profile Curvature");
    CHECK(stack.at(0, 2, 1) == static_cast<float>(dem.at(2, 1)));
    CHECK(stack.at(1, 0, 0) == kDefaultNodata);
    CHECK(stack.at(1, 2, 1) == doctest::Approx(degrees(std::atan(std::sqrt(5.0)))).epsilon(1e-6));

    CHECK_ERROR_KIND(validate(DemGrid(2, 5, kCell)), shape);
    CHECK_ERROR_KIND(validate(DemGrid(3, 3, 0.0)), config);
}

}
