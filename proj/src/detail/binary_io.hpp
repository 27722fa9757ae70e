#pragma once

#include "lulc/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace lulc::detail {

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "short write to " + path.string());
}

template <class T>
T byteswap_if_big(T value) {
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        unsigned char raw[sizeof(T)];
        std::memcpy(raw, &value, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
        std::memcpy(&value, raw, sizeof(T));
    }
    return value;
}

// Appends little-endian values to a byte buffer.
template <class T>
void append_le(std::vector<std::uint8_t>& out, std::span<const T> values) {
    static_assert(std::is_trivially_copyable_v<T>);
    const std::size_t start = out.size();
    out.resize(start + values.size() * sizeof(T));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const T v = byteswap_if_big(values[i]);
        std::memcpy(out.data() + start + i * sizeof(T), &v, sizeof(T));
    }
}

// Sequential little-endian reader with bounds checking.
class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    template <class T>
    std::vector<T> take(std::size_t count) {
        if (count > (bytes_.size() - offset_) / sizeof(T)) {
            fail(ErrorKind::format, what_ + ": payload truncated (need " + std::to_string(count * sizeof(T)) +
                                        " bytes at offset " + std::to_string(offset_) + ", have " +
                                        std::to_string(bytes_.size() - offset_) + ")");
        }
        std::vector<T> values(count);
        for (std::size_t i = 0; i < count; ++i) {
            T v;
            std::memcpy(&v, bytes_.data() + offset_ + i * sizeof(T), sizeof(T));
            values[i] = byteswap_if_big(v);
        }
        offset_ += count * sizeof(T);
        return values;
    }

    std::size_t remaining() const { return bytes_.size() - offset_; }

    void expect_end() const {
        if (remaining() != 0) {
            fail(ErrorKind::format, what_ + ": " + std::to_string(remaining()) + " unexpected trailing bytes");
        }
    }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t offset_ = 0;
    std::string what_;
};

}  // namespace lulc::detail
