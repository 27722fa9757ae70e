#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lulc {

using ClassId = std::uint16_t;

struct ClassEntry {
    int index = 0;
    ClassId id = 0;
    std::string name;
    // Display code used in reports; the decimal id for plain classes, the
    // group id (e.g. "g1") for merged classes.
    std::string code;

    bool operator==(const ClassEntry&) const = default;
};

// Ordered list of classes. Indices are contiguous from 0 and ids are unique.
class ClassCatalog {
public:
    ClassCatalog() = default;
    explicit ClassCatalog(std::vector<ClassEntry> entries);

    // The 17-class baseline catalog of the Jalisco land-cover map.
    static ClassCatalog baseline();

    // Catalog with ids 1..count and generic names.
    static ClassCatalog numbered(int count);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const ClassEntry& operator[](std::size_t index) const { return entries_[index]; }
    const std::vector<ClassEntry>& entries() const { return entries_; }

    std::optional<int> index_of(ClassId id) const;
    int require_index(ClassId id) const;

    bool operator==(const ClassCatalog&) const = default;

private:
    std::vector<ClassEntry> entries_;
};

ClassCatalog read_catalog(const std::filesystem::path& path);
void write_catalog(const ClassCatalog& catalog, const std::filesystem::path& path);

}  // namespace lulc
