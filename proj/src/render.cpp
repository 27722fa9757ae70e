#include "lulc/render.hpp"

#include "detail/binary_io.hpp"

#include <string>

namespace lulc {

Rgb class_color(int index) {
    if (index < 0 || index == kNodataLabel) return kSentinelColor;
    return kClassPalette[static_cast<std::size_t>(index) % kClassPalette.size()];
}

void write_ppm(const Grid<std::uint16_t>& class_indices, const std::filesystem::path& path) {
    const std::string header =
        "P6\n" + std::to_string(class_indices.width) + " " + std::to_string(class_indices.height) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + class_indices.size() * 3);
    for (auto v : class_indices.values) {
        const Rgb c = class_color(v);
        bytes.push_back(c.r);
        bytes.push_back(c.g);
        bytes.push_back(c.b);
    }
    detail::write_bytes(path, bytes);
}

}  // namespace lulc
