#pragma once

#include "lulc/raster.hpp"

#include <array>
#include <cstdint>
#include <filesystem>

namespace lulc {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

// Fixed 17-entry palette indexed by class index (indices wrap); sentinel is black.
inline constexpr std::array<Rgb, 17> kClassPalette{{
    {31, 119, 180},  {255, 127, 14}, {44, 160, 44},   {214, 39, 40},   {148, 103, 189}, {140, 86, 75},
    {227, 119, 194}, {127, 127, 127}, {188, 189, 34}, {23, 190, 207},  {174, 199, 232}, {255, 187, 120},
    {152, 223, 138}, {255, 152, 150}, {197, 176, 213}, {196, 156, 148}, {247, 182, 210},
}};
inline constexpr Rgb kSentinelColor{0, 0, 0};

Rgb class_color(int index);

// Binary portable pixmap (P6) of a class-index map.
void write_ppm(const Grid<std::uint16_t>& class_indices, const std::filesystem::path& path);

}  // namespace lulc
