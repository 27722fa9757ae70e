#pragma once

#include "lulc/catalog.hpp"
#include "lulc/error.hpp"
#include "lulc/raster.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

namespace lulc::detail {

using nlohmann::json;

inline json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(ErrorKind::format, path.string() + ": " + e.what());
    }
}

inline void write_json(const json& doc, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

// Typed field access that reports a format error instead of a json exception.
template <class T>
T field(const json& doc, const char* key, const std::string& what) {
    if (!doc.is_object() || !doc.contains(key)) fail(ErrorKind::format, what + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorKind::format, what + ": bad field '" + key + "': " + e.what());
    }
}

// NaN has no JSON literal; it is written as null.
inline json encode_real(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

inline double decode_real(const json& v, const std::string& what) {
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) fail(ErrorKind::format, what + ": expected a number");
    return v.get<double>();
}

inline json catalog_to_json(const ClassCatalog& catalog) {
    json classes = json::array();
    for (const auto& e : catalog.entries()) {
        classes.push_back({{"index", e.index}, {"id", e.id}, {"name", e.name}, {"code", e.code}});
    }
    return classes;
}

inline ClassCatalog catalog_from_json(const json& classes, const std::string& what) {
    if (!classes.is_array()) fail(ErrorKind::format, what + ": catalog must be an array");
    std::vector<ClassEntry> entries;
    for (const auto& c : classes) {
        ClassEntry e;
        e.index = field<int>(c, "index", what);
        e.id = field<ClassId>(c, "id", what);
        e.name = field<std::string>(c, "name", what);
        e.code = c.contains("code") ? field<std::string>(c, "code", what) : std::to_string(e.id);
        entries.push_back(std::move(e));
    }
    try {
        return ClassCatalog(std::move(entries));
    } catch (const Error& e) {
        fail(ErrorKind::format, what + ": " + e.what());
    }
}

inline json channels_to_json(const std::vector<ChannelDesc>& channels) {
    json out = json::array();
    for (const auto& c : channels) out.push_back({{"name", c.name}, {"kind", to_string(c.kind)}, {"units", c.units}});
    return out;
}

inline std::vector<ChannelDesc> channels_from_json(const json& doc, const std::string& what) {
    if (!doc.is_array()) fail(ErrorKind::format, what + ": channels must be an array");
    std::vector<ChannelDesc> out;
    for (const auto& c : doc) {
        ChannelDesc d;
        d.name = field<std::string>(c, "name", what);
        try {
            d.kind = channel_kind_from_string(field<std::string>(c, "kind", what));
        } catch (const Error& e) {
            fail(ErrorKind::format, what + ": " + e.what());
        }
        d.units = field<std::string>(c, "units", what);
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace lulc::detail
