#pragma once

#include "lulc/error.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace lulc::detail {

// Shortest round-trip representation, '.' decimal separator regardless of locale.
template <class T>
std::string format_number(T value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) return "nan";
    return std::string(buf, end);
}

inline std::string csv_field(std::string_view text) {
    if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
    std::string out = "\"";
    for (char c : text) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
public:
    template <class... Ts>
    void row(const Ts&... fields) {
        bool first = true;
        ((append(fields, first)), ...);
        text_ += '\n';
    }

    void row(const std::vector<std::string>& fields) {
        bool first = true;
        for (const auto& f : fields) append(f, first);
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

    void save(const std::filesystem::path& path) const {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::io, "cannot write " + path.string());
        out << text_;
    }

private:
    template <class T>
    void append(const T& field, bool& first) {
        if (!first) text_ += ',';
        first = false;
        if constexpr (std::is_arithmetic_v<T>) {
            text_ += format_number(field);
        } else {
            text_ += csv_field(std::string_view(field));
        }
    }

    std::string text_;
};

// Minimal reader for the CSVs this library writes (quoted fields supported).
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cur += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(cur));
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(std::move(cur));
        rows.push_back(std::move(fields));
    }
    return rows;
}

template <class T>
T parse_number(const std::string& text, const std::string& what) {
    T value{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail(ErrorKind::format, what + ": cannot parse number '" + text + "'");
    }
    return value;
}

}  // namespace lulc::detail
