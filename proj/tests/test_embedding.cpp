#include "published_tables.hpp"
#include "support.hpp"

#include "lulc/embedding.hpp"
#include "lulc/pipeline.hpp"

#include <doctest.h>

#include <cmath>

using namespace lulc;
using namespace lulc::test;

namespace {

ConfusionMatrix baseline_matrix() {
    std::vector<std::int64_t> counts;
    for (const auto& row : kBaselineConfusion) counts.insert(counts.end(), row.begin(), row.end());
    return ConfusionMatrix(ClassCatalog::baseline(), counts);
}

LatentSet latents_from(const std::vector<std::vector<float>>& centroids, int per_class, Rng& rng, double noise) {
    LatentSet set;
    set.dim = static_cast<int>(centroids[0].size());
    set.catalog = ClassCatalog::numbered(static_cast<int>(centroids.size()));
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        for (int i = 0; i < per_class; ++i) {
            for (float v : centroids[c]) set.vectors.push_back(v + static_cast<float>(rng.normal(0, noise)));
            set.labels.push_back(static_cast<int>(c));
        }
    }
    return set;
}

PatchSet tiny_patchset() {
    PatchSet set;
    set.channels = {{"a", ChannelKind::spectral, ""}};
    set.catalog = ClassCatalog::baseline();
    for (int i = 0; i < 34; ++i) {
        Patch p;
        p.values.assign(9, static_cast<float>(i));
        p.label_index = static_cast<std::uint16_t>(i % 17);
        p.split = static_cast<Split>(i % 3);
        p.source_x = i;
        set.patches.push_back(p);
    }
    return set;
}

}  // namespace

TEST_SUITE("embedding") {

TEST_CASE("published mapping folds 17 classes into 13") {
    const auto g = resolve_grouping(ClassCatalog::baseline(), published_mapping());
    REQUIRE(g.coarse.size() == 13);
    const auto g1 = g.coarse[*g.coarse.index_of(2)];
    CHECK(g1.code == "g1");
    CHECK(g1.name == "Coniferous forest and Oak forest and riparian forest");
    const auto g2 = g.coarse[*g.coarse.index_of(12)];
    CHECK(g2.code == "g2");
    CHECK_FALSE(g.coarse.index_of(34).has_value());
    CHECK(g.coarse_index[*ClassCatalog::baseline().index_of(34)] == g2.index);
    CHECK(g.coarse[0].id == 32);
}

TEST_CASE("grouping the published matrix conserves counts and raises accuracy") {
    const auto cm = baseline_matrix();
    const auto merged = apply_grouping(cm, published_mapping());
    CHECK(merged.classes() == 13);
    CHECK(merged.total() == cm.total());
    CHECK(overall_accuracy(merged) > overall_accuracy(cm));

    // Independent oracle: add the cross-confusions of each merged pair to the trace.
    const auto& cat = cm.catalog;
    std::int64_t trace = cm.trace();
    for (const auto& group : published_mapping().groups) {
        const auto a = *cat.index_of(group.members[0]), b = *cat.index_of(group.members[1]);
        trace += cm.at(a, b) + cm.at(b, a);
    }
    CHECK(merged.trace() == trace);
}

TEST_CASE("identity mapping changes nothing") {
    const auto cm = baseline_matrix();
    CHECK(apply_grouping(cm, GroupMapping{}) == cm);
    const auto set = tiny_patchset();
    CHECK(apply_grouping(set, GroupMapping{}) == set);
    const std::vector<int> labels{0, 4, 16};
    CHECK(apply_grouping(labels, ClassCatalog::baseline(), GroupMapping{}) == labels);
}

TEST_CASE("property: merging never lowers accuracy and is strict iff cross-confusion exists") {
    Rng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const int k = 3 + static_cast<int>(rng.below(6));
        ConfusionMatrix cm{ClassCatalog::numbered(k)};
        for (auto& c : cm.counts) c = static_cast<std::int64_t>(rng.below(5));
        cm.at(0, 0) += 1;
        if (trial % 4 == 0) cm.at(0, 1) = cm.at(1, 0) = 0;
        const GroupMapping mapping{{{"g1", {1, 2}}}};
        const auto merged = apply_grouping(cm, mapping);
        CHECK(merged.total() == cm.total());
        CHECK(overall_accuracy(merged) >= overall_accuracy(cm));
        const bool cross = cm.at(0, 1) + cm.at(1, 0) > 0;
        CHECK((overall_accuracy(merged) > overall_accuracy(cm)) == cross);

        std::vector<int> truth, pred;
        for (int i = 0; i < 50; ++i) {
            truth.push_back(static_cast<int>(rng.below(k)));
            pred.push_back(static_cast<int>(rng.below(k)));
        }
        const auto before = confusion(truth, pred, cm.catalog);
        const auto g = resolve_grouping(cm.catalog, mapping);
        const auto after = confusion(apply_grouping(truth, cm.catalog, mapping), apply_grouping(pred, cm.catalog, mapping), g.coarse);
        CHECK(after == apply_grouping(before, mapping));
    }
}

TEST_CASE("mapping validation") {
    CHECK_ERROR_KIND(resolve_grouping(ClassCatalog::baseline(), GroupMapping{{{"g1", {2, 4}}}}), coverage);
    CHECK_ERROR_KIND(resolve_grouping(ClassCatalog::baseline(), GroupMapping{{{"g1", {2, 3}}, {"g2", {3, 1}}}}), config);
    CHECK_ERROR_KIND(apply_grouping(std::vector<int>{17}, ClassCatalog::baseline(), published_mapping()), coverage);

    TempDir dir;
    write_mapping(published_mapping(), dir / "m.json");
    CHECK(read_mapping(dir / "m.json") == published_mapping());
    spit(dir / "bad.json", "{\"groups\": [{\"id\": \"g1\"}]}");
    CHECK_ERROR_KIND(read_mapping(dir / "bad.json"), format);
}

TEST_CASE("fine-grain subsets") {
    const auto set = tiny_patchset();
    const auto g1 = fine_grain_dataset(set, {"g1", {3, 2}});
    REQUIRE(g1.catalog.size() == 2);
    CHECK(g1.catalog[0].id == 2);
    CHECK(g1.catalog[1].id == 3);
    CHECK(g1.size() == 4);
    for (const auto& p : g1.patches) {
        const auto& original = set.patches[p.source_x];
        CHECK(p.split == original.split);
        CHECK(set.catalog[original.label_index].id == g1.catalog[p.label_index].id);
    }
    auto sparse = set;
    sparse.patches.clear();
    CHECK(fine_grain_dataset(sparse, {"g1", {2, 3}}).size() == 0);
    CHECK_ERROR_KIND(fine_grain_dataset(set, {"g9", {2, 3, 1}}), config);
    CHECK_ERROR_KIND(fine_grain_dataset(set, {"g9", {2, 4}}), coverage);
}

TEST_CASE("group suggestions") {
    Rng rng(1);
    SUBCASE("identical centroids merge at any positive threshold") {
        const auto l = latents_from({{1, 0, 0}, {1, 0, 0}}, 5, rng, 0.0);
        const auto s = suggest_groups(l, 1e-9);
        REQUIRE(s.mapping.groups.size() == 1);
        CHECK(s.mapping.groups[0].members == std::vector<ClassId>{1, 2});
    }
    SUBCASE("orthogonal centroids stay apart") {
        const auto l = latents_from({{1, 0, 0}, {0, 1, 0}}, 5, rng, 0.0);
        const auto s = suggest_groups(l, 0.5);
        CHECK(s.mapping.groups.empty());
        CHECK(s.ranked[0].distance == doctest::Approx(1.0));
    }
    SUBCASE("A close to B, both orthogonal to C") {
        const auto l = latents_from({{1, 0, 0}, {0.98f, 0.2f, 0}, {0, 0, 1}}, 20, rng, 0.01);
        const auto s = suggest_groups(l, 0.1);
        REQUIRE(s.mapping.groups.size() == 1);
        CHECK(s.mapping.groups[0].id == "g1");
        CHECK(s.mapping.groups[0].members == std::vector<ClassId>{1, 2});
        CHECK(s.ranked[0].a == 0);
        CHECK(s.ranked[0].b == 1);
        CHECK(s.ranked.size() == 3);
    }
    SUBCASE("absent class") {
        auto l = latents_from({{1, 0}, {0, 1}}, 3, rng, 0.0);
        l.catalog = ClassCatalog::numbered(3);
        CHECK_ERROR_KIND(suggest_groups(l, 0.5), coverage);
    }
}

TEST_CASE("property: suggestions do not depend on latent order") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::vector<float>> centroids;
        for (int c = 0; c < 5; ++c) {
            std::vector<float> v(6);
            for (auto& x : v) x = static_cast<float>(rng.normal());
            centroids.push_back(v);
        }
        const auto l = latents_from(centroids, 12, rng, 0.3);
        LatentSet shuffled = l;
        std::vector<std::size_t> order(l.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t i = 0; i < order.size(); ++i) {
            shuffled.labels[i] = l.labels[order[i]];
            for (int d = 0; d < l.dim; ++d) shuffled.vectors[i * l.dim + d] = l.vectors[order[i] * l.dim + d];
        }
        const auto a = suggest_groups(l, 0.6), b = suggest_groups(shuffled, 0.6);
        CHECK(a.mapping == b.mapping);
        REQUIRE(a.ranked.size() == b.ranked.size());
        for (std::size_t i = 0; i < a.ranked.size(); ++i) {
            CHECK(a.ranked[i].a == b.ranked[i].a);
            CHECK(a.ranked[i].b == b.ranked[i].b);
            CHECK(a.ranked[i].distance == b.ranked[i].distance);
        }
    }
}

TEST_CASE("latents from the embedding network") {
    auto set = tiny_patchset();
    Architecture arch;
    arch.channels = 1;
    arch.variant = Variant::embedding;
    auto model = init_model(arch, 5);
    model.input_norm = {{10.0}, {5.0}};
    model.catalog = set.catalog;
    const auto l = extract_latents(model, set, Split::test);
    CHECK(l.size() == set.count(Split::test));
    CHECK(l.dim == 17);
    for (std::size_t i = 0; i < l.size(); ++i) {
        double n = 0.0;
        for (float v : l.vector(i)) n += static_cast<double>(v) * v;
        CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
    }
    const auto again = extract_latents(model, set, Split::test);
    CHECK(again.vectors == l.vectors);

    TempDir dir;
    write_latents_csv(l, dir / "l.csv");
    const auto back = read_latents_csv(dir / "l.csv", set.catalog);
    CHECK(back.vectors == l.vectors);
    CHECK(back.labels == l.labels);

    arch.variant = Variant::classifier;
    CHECK_ERROR_KIND(extract_latents(init_model(arch, 5), set, Split::test), compatibility);
}

TEST_CASE("silhouette of separated and mixed clusters") {
    const std::vector<double> pts{0, 0, 0, 1, 10, 0, 10, 1};
    CHECK(silhouette_score(pts, 4, 2, std::vector<int>{0, 0, 1, 1}) > 0.9);
    CHECK(silhouette_score(pts, 4, 2, std::vector<int>{0, 1, 0, 1}) < 0.0);
    // a = 1, b = mean(10, sqrt(101)) for every point.
    const double b = (10.0 + std::sqrt(101.0)) / 2.0;
    CHECK(silhouette_score(pts, 4, 2, std::vector<int>{0, 0, 1, 1}) == doctest::Approx((b - 1.0) / b));
}

}
