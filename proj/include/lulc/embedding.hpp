#pragma once

#include "lulc/catalog.hpp"
#include "lulc/metrics.hpp"
#include "lulc/nn.hpp"
#include "lulc/patchset.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lulc {

// Unit-norm latent vectors, one per patch, with their class indices.
struct LatentSet {
    int dim = 0;
    std::vector<float> vectors;  // size() x dim
    std::vector<int> labels;
    ClassCatalog catalog;

    std::size_t size() const { return labels.size(); }
    std::span<const float> vector(std::size_t i) const { return {vectors.data() + i * dim, static_cast<std::size_t>(dim)}; }
};

LatentSet extract_latents(const Model& model, const PatchSet& patches, Split split);

void write_latents_csv(const LatentSet& latents, const std::filesystem::path& path);
LatentSet read_latents_csv(const std::filesystem::path& path, const ClassCatalog& catalog);

// --- class groups ------------------------------------------------------------------

struct ClassGroup {
    std::string id;  // "g1", "g2", ...
    std::vector<ClassId> members;

    bool operator==(const ClassGroup&) const = default;
};

// Classes not named in any group map to themselves.
struct GroupMapping {
    std::vector<ClassGroup> groups;

    bool operator==(const GroupMapping&) const = default;
};

// g1={2,3}, g2={34,12}, g3={29,35}, g4={15,28}.
GroupMapping published_mapping();

GroupMapping read_mapping(const std::filesystem::path& path);
void write_mapping(const GroupMapping& mapping, const std::filesystem::path& path);

// Resolved mapping from a fine catalog onto the merged catalog. A group's
// entry takes the smallest member id, the group id as its code, and the member
// names joined with " and "; it sits where its earliest member sat.
struct Grouping {
    ClassCatalog fine;
    ClassCatalog coarse;
    std::vector<int> coarse_index;  // fine index -> coarse index
};

Grouping resolve_grouping(const ClassCatalog& catalog, const GroupMapping& mapping);

PatchSet apply_grouping(const PatchSet& patches, const GroupMapping& mapping);
std::vector<int> apply_grouping(std::span<const int> labels, const ClassCatalog& catalog, const GroupMapping& mapping);
ConfusionMatrix apply_grouping(const ConfusionMatrix& cm, const GroupMapping& mapping);

// Binary subset for a two-member group, relabeled 0/1 in catalog order.
PatchSet fine_grain_dataset(const PatchSet& patches, const ClassGroup& group);

struct PairDistance {
    int a = 0;  // catalog indices, a < b
    int b = 0;
    double distance = 0.0;  // 1 - cosine similarity of the class centroids
};

struct GroupSuggestion {
    GroupMapping mapping;
    std::vector<PairDistance> ranked;  // all pairs, closest first
};

// Merges class pairs whose centroid cosine distance is below `threshold`
// (connected components). Groups are numbered by their closest pair.
GroupSuggestion suggest_groups(const LatentSet& latents, double threshold);

void write_pairs_csv(const GroupSuggestion& suggestion, const ClassCatalog& catalog, const std::filesystem::path& path);

// Mean silhouette coefficient of `points` (n x dim) under `labels`.
double silhouette_score(std::span<const double> points, std::size_t n, std::size_t dim, std::span<const int> labels);

}  // namespace lulc
