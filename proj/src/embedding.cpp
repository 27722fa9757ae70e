#include "lulc/embedding.hpp"

#include "detail/csv.hpp"
#include "detail/json_io.hpp"
#include "lulc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

namespace lulc {

LatentSet extract_latents(const Model& model, const PatchSet& patches, Split split) {
    if (model.arch.variant != Variant::embedding) {
        fail(ErrorKind::compatibility, "latent extraction requires the embedding-variant model");
    }
    if (static_cast<std::size_t>(model.arch.channels) != patches.channel_count()) {
        fail(ErrorKind::compatibility, "model expects " + std::to_string(model.arch.channels) + " channels, patch set has " +
                                           std::to_string(patches.channel_count()));
    }
    if (static_cast<std::size_t>(model.arch.classes) != patches.catalog.size()) {
        fail(ErrorKind::compatibility, "model and patch set catalogs differ in size");
    }
    const auto selected = patches.select(split);
    std::vector<float> raw;
    raw.reserve(selected.size() * model.arch.input_size());
    LatentSet out;
    out.dim = model.arch.output_dim();
    out.catalog = patches.catalog;
    for (const auto* p : selected) {
        raw.insert(raw.end(), p->values.begin(), p->values.end());
        out.labels.push_back(p->label_index);
    }
    out.vectors = embed(model, raw, selected.size());
    return out;
}

void write_latents_csv(const LatentSet& latents, const std::filesystem::path& path) {
    detail::CsvWriter csv;
    std::vector<std::string> header{"label_index"};
    for (int d = 0; d < latents.dim; ++d) header.push_back("v" + std::to_string(d));
    csv.row(header);
    for (std::size_t i = 0; i < latents.size(); ++i) {
        std::vector<std::string> row{std::to_string(latents.labels[i])};
        for (float v : latents.vector(i)) row.push_back(detail::format_number(v));
        csv.row(row);
    }
    csv.save(path);
}

LatentSet read_latents_csv(const std::filesystem::path& path, const ClassCatalog& catalog) {
    const auto rows = detail::read_csv(path);
    const std::string what = path.string();
    if (rows.empty() || rows[0].empty() || rows[0][0] != "label_index") fail(ErrorKind::format, what + ": missing latent header");
    LatentSet out;
    out.dim = static_cast<int>(rows[0].size()) - 1;
    out.catalog = catalog;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) fail(ErrorKind::format, what + ": ragged row " + std::to_string(r));
        const int label = detail::parse_number<int>(rows[r][0], what);
        if (label < 0 || static_cast<std::size_t>(label) >= catalog.size()) fail(ErrorKind::label, what + ": label outside catalog");
        out.labels.push_back(label);
        for (int d = 0; d < out.dim; ++d) out.vectors.push_back(detail::parse_number<float>(rows[r][d + 1], what));
    }
    return out;
}

// --- group mappings ------------------------------------------------------------------

GroupMapping published_mapping() {
    return {{{"g1", {2, 3}}, {"g2", {34, 12}}, {"g3", {29, 35}}, {"g4", {15, 28}}}};
}

GroupMapping read_mapping(const std::filesystem::path& path) {
    const auto doc = detail::read_json(path);
    const std::string what = path.string();
    if (!doc.contains("groups") || !doc["groups"].is_array()) fail(ErrorKind::format, what + ": missing groups array");
    GroupMapping mapping;
    for (const auto& g : doc["groups"]) {
        ClassGroup group;
        group.id = detail::field<std::string>(g, "id", what);
        group.members = detail::field<std::vector<ClassId>>(g, "members", what);
        mapping.groups.push_back(std::move(group));
    }
    return mapping;
}

void write_mapping(const GroupMapping& mapping, const std::filesystem::path& path) {
    detail::json groups = detail::json::array();
    for (const auto& g : mapping.groups) groups.push_back({{"id", g.id}, {"members", g.members}});
    detail::write_json({{"groups", std::move(groups)}}, path);
}

Grouping resolve_grouping(const ClassCatalog& catalog, const GroupMapping& mapping) {
    const std::size_t k = catalog.size();
    std::vector<int> group_of(k, -1);
    std::set<std::string> ids;
    for (std::size_t g = 0; g < mapping.groups.size(); ++g) {
        const auto& group = mapping.groups[g];
        if (group.members.empty()) fail(ErrorKind::config, "group " + group.id + " has no members");
        if (!ids.insert(group.id).second) fail(ErrorKind::config, "duplicate group id " + group.id);
        for (ClassId id : group.members) {
            const auto idx = catalog.index_of(id);
            if (!idx) fail(ErrorKind::coverage, "group " + group.id + " names class " + std::to_string(id) + " absent from the catalog");
            if (group_of[*idx] >= 0) fail(ErrorKind::config, "class " + std::to_string(id) + " belongs to more than one group");
            group_of[*idx] = static_cast<int>(g);
        }
    }

    Grouping out;
    out.fine = catalog;
    out.coarse_index.assign(k, -1);
    std::vector<ClassEntry> entries;
    std::vector<int> slot_of_group(mapping.groups.size(), -1);
    for (std::size_t i = 0; i < k; ++i) {
        const int g = group_of[i];
        if (g < 0) {
            ClassEntry e = catalog[i];
            e.index = static_cast<int>(entries.size());
            out.coarse_index[i] = e.index;
            entries.push_back(std::move(e));
            continue;
        }
        if (slot_of_group[g] < 0) {
            const auto& group = mapping.groups[g];
            ClassEntry e;
            e.index = static_cast<int>(entries.size());
            e.id = *std::min_element(group.members.begin(), group.members.end());
            e.code = group.id;
            for (std::size_t j = 0; j < k; ++j) {
                if (group_of[j] != g) continue;
                if (!e.name.empty()) e.name += " and ";
                e.name += catalog[j].name;
            }
            slot_of_group[g] = e.index;
            entries.push_back(std::move(e));
        }
        out.coarse_index[i] = slot_of_group[g];
    }
    out.coarse = ClassCatalog(std::move(entries));
    return out;
}

PatchSet apply_grouping(const PatchSet& patches, const GroupMapping& mapping) {
    const auto grouping = resolve_grouping(patches.catalog, mapping);
    PatchSet out = patches;
    out.catalog = grouping.coarse;
    for (auto& p : out.patches) {
        if (p.label_index >= grouping.coarse_index.size()) fail(ErrorKind::coverage, "patch label outside the catalog");
        p.label_index = static_cast<std::uint16_t>(grouping.coarse_index[p.label_index]);
    }
    return out;
}

std::vector<int> apply_grouping(std::span<const int> labels, const ClassCatalog& catalog, const GroupMapping& mapping) {
    const auto grouping = resolve_grouping(catalog, mapping);
    std::vector<int> out;
    out.reserve(labels.size());
    for (int l : labels) {
        if (l < 0 || static_cast<std::size_t>(l) >= grouping.coarse_index.size()) {
            fail(ErrorKind::coverage, "label index " + std::to_string(l) + " is not covered by the mapping");
        }
        out.push_back(grouping.coarse_index[l]);
    }
    return out;
}

ConfusionMatrix apply_grouping(const ConfusionMatrix& cm, const GroupMapping& mapping) {
    const auto grouping = resolve_grouping(cm.catalog, mapping);
    ConfusionMatrix out(grouping.coarse);
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        for (std::size_t j = 0; j < cm.classes(); ++j) {
            out.at(grouping.coarse_index[i], grouping.coarse_index[j]) += cm.at(i, j);
        }
    }
    return out;
}

PatchSet fine_grain_dataset(const PatchSet& patches, const ClassGroup& group) {
    if (group.members.size() != 2) {
        fail(ErrorKind::config, "fine-grain group " + group.id + " must have exactly 2 members, has " +
                                    std::to_string(group.members.size()));
    }
    std::vector<int> members;
    for (ClassId id : group.members) {
        const auto idx = patches.catalog.index_of(id);
        if (!idx) fail(ErrorKind::coverage, "class " + std::to_string(id) + " is absent from the catalog");
        members.push_back(*idx);
    }
    if (members[0] == members[1]) fail(ErrorKind::config, "fine-grain group repeats a class");
    std::sort(members.begin(), members.end());

    std::vector<ClassEntry> entries;
    for (int i = 0; i < 2; ++i) {
        ClassEntry e = patches.catalog[members[i]];
        e.index = i;
        entries.push_back(std::move(e));
    }
    PatchSet out;
    out.channels = patches.channels;
    out.catalog = ClassCatalog(std::move(entries));
    out.seed = patches.seed;
    for (const auto& p : patches.patches) {
        for (int i = 0; i < 2; ++i) {
            if (p.label_index == members[i]) {
                Patch q = p;
                q.label_index = static_cast<std::uint16_t>(i);
                out.patches.push_back(std::move(q));
            }
        }
    }
    return out;
}

// --- suggestions ---------------------------------------------------------------------

namespace {

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

GroupSuggestion suggest_groups(const LatentSet& latents, double threshold) {
    const std::size_t k = latents.catalog.size();
    const auto dim = static_cast<std::size_t>(latents.dim);
    if (k < 2) fail(ErrorKind::data, "group suggestion needs at least two classes");
    if (latents.vectors.size() != latents.size() * dim) fail(ErrorKind::shape, "latent vectors do not match dimension");

    // Canonical order inside each class makes the centroid independent of input order.
    std::vector<std::vector<std::span<const float>>> by_class(k);
    for (std::size_t i = 0; i < latents.size(); ++i) {
        const int l = latents.labels[i];
        if (l < 0 || static_cast<std::size_t>(l) >= k) fail(ErrorKind::label, "latent label outside the catalog");
        by_class[l].push_back(latents.vector(i));
    }
    std::vector<std::vector<double>> centroid(k, std::vector<double>(dim, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
        auto& members = by_class[c];
        if (members.empty()) {
            fail(ErrorKind::coverage, "class " + latents.catalog[c].code + " has no latent vectors");
        }
        std::sort(members.begin(), members.end(), [](std::span<const float> a, std::span<const float> b) {
            return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
        });
        for (const auto& v : members) {
            for (std::size_t d = 0; d < dim; ++d) centroid[c][d] += v[d];
        }
        for (auto& x : centroid[c]) x /= static_cast<double>(members.size());
    }

    GroupSuggestion out;
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            double dot = 0.0, na = 0.0, nb = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                dot += centroid[a][d] * centroid[b][d];
                na += centroid[a][d] * centroid[a][d];
                nb += centroid[b][d] * centroid[b][d];
            }
            const double denom = std::sqrt(na) * std::sqrt(nb);
            const double cosine = denom > 0.0 ? dot / denom : 0.0;
            out.ranked.push_back({static_cast<int>(a), static_cast<int>(b), 1.0 - cosine});
        }
    }
    std::stable_sort(out.ranked.begin(), out.ranked.end(),
                     [](const PairDistance& x, const PairDistance& y) { return x.distance < y.distance; });

    DisjointSets sets(k);
    for (const auto& pair : out.ranked) {
        if (pair.distance < threshold) sets.unite(pair.a, pair.b);
    }
    std::map<int, std::vector<int>> components;
    for (std::size_t c = 0; c < k; ++c) components[sets.find(static_cast<int>(c))].push_back(static_cast<int>(c));

    // Number groups by the first (closest) ranked pair that falls inside them.
    std::vector<int> order;
    for (const auto& pair : out.ranked) {
        if (pair.distance >= threshold) break;
        const int root = sets.find(pair.a);
        if (std::find(order.begin(), order.end(), root) == order.end()) order.push_back(root);
    }
    for (std::size_t g = 0; g < order.size(); ++g) {
        ClassGroup group;
        group.id = "g" + std::to_string(g + 1);
        for (int c : components[order[g]]) group.members.push_back(latents.catalog[c].id);
        out.mapping.groups.push_back(std::move(group));
    }
    return out;
}

void write_pairs_csv(const GroupSuggestion& suggestion, const ClassCatalog& catalog, const std::filesystem::path& path) {
    detail::CsvWriter csv;
    csv.row("rank", "class_a", "class_b", "cosine_distance");
    for (std::size_t i = 0; i < suggestion.ranked.size(); ++i) {
        const auto& p = suggestion.ranked[i];
        csv.row(i + 1, catalog[p.a].code, catalog[p.b].code, p.distance);
    }
    csv.save(path);
}

double silhouette_score(std::span<const double> points, std::size_t n, std::size_t dim, std::span<const int> labels) {
    if (points.size() != n * dim || labels.size() != n) fail(ErrorKind::shape, "silhouette inputs disagree in size");
    std::map<int, std::size_t> sizes;
    for (int l : labels) ++sizes[l];
    if (sizes.size() < 2) fail(ErrorKind::data, "silhouette needs at least two clusters");

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::map<int, double> sum;
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double d2 = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = points[i * dim + d] - points[j * dim + d];
                d2 += diff * diff;
            }
            sum[labels[j]] += std::sqrt(d2);
        }
        const std::size_t own = sizes[labels[i]];
        if (own <= 1) continue;  // singleton clusters score 0
        const double a = sum[labels[i]] / static_cast<double>(own - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [label, count] : sizes) {
            if (label != labels[i]) b = std::min(b, sum[label] / static_cast<double>(count));
        }
        const double m = std::max(a, b);
        total += m > 0.0 ? (b - a) / m : 0.0;
    }
    return total / static_cast<double>(n);
}

}  // namespace lulc
