#pragma once

#include "lulc/error.hpp"
#include "lulc/raster.hpp"
#include "lulc/rng.hpp"

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace lulc::test {

// Kind of the lulc::Error thrown by `f`, or nullopt if nothing (or something else) was thrown.
template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    } catch (...) {
        return std::nullopt;
    }
    return std::nullopt;
}

#define CHECK_ERROR_KIND(expr, k) CHECK(::lulc::test::error_kind([&] { (void)(expr); }) == ::lulc::ErrorKind::k)

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lulc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
}

inline RasterStack random_stack(Rng& rng, int w, int h, int channels, float nodata = kDefaultNodata,
                                double nodata_rate = 0.05) {
    RasterStack s;
    s.width = w;
    s.height = h;
    s.nodata = nodata;
    for (int c = 0; c < channels; ++c) s.channels.push_back({"c" + std::to_string(c), ChannelKind::spectral, "u"});
    s.data.resize(s.pixel_count() * channels);
    for (auto& v : s.data) v = rng.uniform() < nodata_rate ? nodata : static_cast<float>(rng.normal(0.0, 100.0));
    return s;
}

}  // namespace lulc::test
