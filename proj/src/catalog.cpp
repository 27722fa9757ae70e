#include "lulc/catalog.hpp"

#include "detail/json_io.hpp"

#include <set>

namespace lulc {

ClassCatalog::ClassCatalog(std::vector<ClassEntry> entries) : entries_(std::move(entries)) {
    std::set<ClassId> seen;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto& e = entries_[i];
        if (e.index != static_cast<int>(i)) {
            fail(ErrorKind::catalog, "class indices must be contiguous from 0 (entry " + std::to_string(i) +
                                         " has index " + std::to_string(e.index) + ")");
        }
        if (!seen.insert(e.id).second) fail(ErrorKind::catalog, "duplicate class id " + std::to_string(e.id));
        if (e.code.empty()) e.code = std::to_string(e.id);
    }
}

ClassCatalog ClassCatalog::baseline() {
    const std::pair<ClassId, const char*> rows[] = {
        {32, "Water"},
        {2, "Coniferous forest"},
        {1, "Upland coniferous forest"},
        {3, "Oak forest and riparian forest"},
        {7, "Cloud forest and low evergreen forest"},
        {9, "Mangrove and peten"},
        {15, "Crassicaule shrub"},
        {5, "Mezquital and submontane shrub"},
        {34, "Cultivated and induced grasslands"},
        {28, "Natural grasslands"},
        {12, "Tropical dry forest"},
        {13, "Tropical semideciduous forest"},
        {31, "Bare land"},
        {29, "Rain fed agriculture"},
        {35, "Cropland irrigated"},
        {30, "Urban areas"},
        {26, "Hydrophilic halophilic vegetation"},
    };
    std::vector<ClassEntry> entries;
    int index = 0;
    for (const auto& [id, name] : rows) entries.push_back({index++, id, name, std::to_string(id)});
    return ClassCatalog(std::move(entries));
}

ClassCatalog ClassCatalog::numbered(int count) {
    std::vector<ClassEntry> entries;
    for (int i = 0; i < count; ++i) {
        const auto id = static_cast<ClassId>(i + 1);
        entries.push_back({i, id, "class " + std::to_string(id), std::to_string(id)});
    }
    return ClassCatalog(std::move(entries));
}

std::optional<int> ClassCatalog::index_of(ClassId id) const {
    for (const auto& e : entries_) {
        if (e.id == id) return e.index;
    }
    return std::nullopt;
}

int ClassCatalog::require_index(ClassId id) const {
    if (auto i = index_of(id)) return *i;
    fail(ErrorKind::catalog, "class id " + std::to_string(id) + " is not in the catalog");
}

ClassCatalog read_catalog(const std::filesystem::path& path) {
    const auto doc = detail::read_json(path);
    return detail::catalog_from_json(doc.contains("classes") ? doc.at("classes") : doc, path.string());
}

void write_catalog(const ClassCatalog& catalog, const std::filesystem::path& path) {
    detail::write_json({{"classes", detail::catalog_to_json(catalog)}}, path);
}

}  // namespace lulc
