#include "published_tables.hpp"
#include "support.hpp"

#include "lulc/metrics.hpp"

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

ClassCatalog catalog_of(int k) { return ClassCatalog::numbered(k); }

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counts pairs") {
    const std::vector<int> truth{0, 1, 1, 2, 2, 2};
    const std::vector<int> pred{0, 1, 2, 2, 2, 0};
    const auto cm = confusion(truth, pred, catalog_of(3));
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(1, 2) == 1);
    CHECK(cm.at(2, 2) == 2);
    CHECK(cm.at(2, 0) == 1);
    CHECK(cm.total() == 6);
    for (std::size_t k = 0; k < 3; ++k) CHECK(cm.row_sum(k) == std::count(truth.begin(), truth.end(), static_cast<int>(k)));

    const auto perfect = confusion(truth, truth, catalog_of(3));
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) CHECK(perfect.at(i, j) == 0);

    const auto empty = confusion(std::vector<int>{}, std::vector<int>{}, catalog_of(3));
    CHECK(empty.total() == 0);
    CHECK_ERROR_KIND(confusion(std::vector<int>{0, 3}, std::vector<int>{0, 0}, catalog_of(3)), label);
    CHECK_ERROR_KIND(confusion(std::vector<int>{0}, std::vector<int>{0, 0}, catalog_of(3)), shape);
}

TEST_CASE("report scores from hand-computed ratios") {
    const ConfusionMatrix cm(catalog_of(2), {5, 0, 0, 5});
    const auto r = report(cm);
    for (const auto& row : r.rows) {
        CHECK(row.precision == 1.0);
        CHECK(row.recall == 1.0);
        CHECK(row.f1 == 1.0);
        CHECK(row.support == 5);
    }
    CHECK(r.accuracy == 1.0);

    const ConfusionMatrix g1(catalog_of(2), {118, 66, 46, 142});
    const auto rg = report(g1);
    const double p = 118.0 / 164.0, rc = 118.0 / 184.0;
    CHECK(rg.rows[0].precision == doctest::Approx(p));
    CHECK(rg.rows[0].recall == doctest::Approx(rc));
    CHECK(rg.rows[0].f1 == doctest::Approx(2 * p * rc / (p + rc)));
    CHECK(std::abs(rg.rows[0].precision - 0.72) < 0.005);
    CHECK(std::abs(rg.rows[0].recall - 0.64) < 0.005);
    CHECK(std::abs(rg.rows[0].f1 - 0.68) < 0.005);
}

TEST_CASE("zero denominators give zero scores") {
    const ConfusionMatrix cm(catalog_of(3), {4, 0, 0, 2, 0, 0, 0, 0, 0});
    const auto r = report(cm);
    CHECK(r.rows[1].precision == 0.0);
    CHECK(r.rows[1].recall == 0.0);
    CHECK(r.rows[1].f1 == 0.0);
    CHECK(r.rows[2].precision == 0.0);
    CHECK(r.rows[2].support == 0);
    CHECK(report(ConfusionMatrix(catalog_of(2))).accuracy == 0.0);
}

TEST_CASE("overall accuracy") {
    CHECK(overall_accuracy(ConfusionMatrix(catalog_of(2), {3, 0, 0, 9})) == 1.0);
    CHECK(overall_accuracy(ConfusionMatrix(catalog_of(2), {0, 3, 9, 0})) == 0.0);
    CHECK_ERROR_KIND(overall_accuracy(ConfusionMatrix(catalog_of(2))), empty_sample);
}

TEST_CASE("published baseline matrix against its report") {
    const auto cm = baseline_matrix();
    CHECK(cm.row_sum(0) == 207);
    const auto r = report(cm);
    CHECK(r.rows[0].recall == doctest::Approx(192.0 / 207.0));
    CHECK(r.rows[0].precision == doctest::Approx(192.0 / 195.0));
    for (std::size_t k = 0; k < 17; ++k) {
        CAPTURE(kBaselineReport[k].id);
        CHECK(cm.catalog[k].id == kBaselineReport[k].id);
        CHECK(r.rows[k].support == kBaselineReport[k].support);
        CHECK(std::abs(r.rows[k].precision - kBaselineReport[k].precision) <= 0.01 + 1e-9);
        CHECK(std::abs(r.rows[k].recall - kBaselineReport[k].recall) <= 0.01 + 1e-9);
        CHECK(std::abs(r.rows[k].f1 - kBaselineReport[k].f1) <= 0.01 + 1e-9);
    }
    // trace / total of the published counts.
    CHECK(overall_accuracy(cm) == doctest::Approx(2245.0 / 3157.0));
}

TEST_CASE("property: permuting classes permutes report rows") {
    Rng rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t k = 2 + rng.below(8);
        std::vector<std::int64_t> counts(k * k);
        for (auto& c : counts) c = static_cast<std::int64_t>(rng.below(30));
        const auto cm = ConfusionMatrix(catalog_of(static_cast<int>(k)), counts);
        std::vector<std::size_t> perm(k);
        for (std::size_t i = 0; i < k; ++i) perm[i] = i;
        rng.shuffle(std::span<std::size_t>(perm));
        std::vector<ClassEntry> entries;
        for (std::size_t i = 0; i < k; ++i) {
            auto e = cm.catalog[perm[i]];
            e.index = static_cast<int>(i);
            entries.push_back(e);
        }
        ConfusionMatrix permuted{ClassCatalog(entries)};
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) permuted.at(i, j) = cm.at(perm[i], perm[j]);
        const auto a = report(cm), b = report(permuted);
        for (std::size_t i = 0; i < k; ++i) CHECK(b.rows[i] == a.rows[perm[i]]);
        CHECK(b.accuracy == a.accuracy);
        CHECK(report(cm) == a);
    }
}

TEST_CASE("CSV round trip keeps report and confusion consistent") {
    TempDir dir;
    const auto cm = baseline_matrix();
    write_confusion_csv(cm, dir / "cm.csv");
    const auto back = read_confusion_csv(dir / "cm.csv", cm.catalog);
    CHECK(back == cm);
    CHECK(report(back) == report(cm));
    const auto text = slurp(dir / "cm.csv");
    CHECK(text.rfind("true\\pred,32,2,1,3,", 0) == 0);
    CHECK(text.find('\r') == std::string::npos);
    CHECK_ERROR_KIND(read_confusion_csv(dir / "cm.csv", catalog_of(17)), format);

    write_report_csv(report(cm), dir / "r.csv");
    const auto rep = slurp(dir / "r.csv");
    CHECK(rep.rfind("class_index,class_id,name,precision,recall,f1,support\n0,32,Water,", 0) == 0);
    CHECK(rep.find("overall_accuracy") != std::string::npos);
    CHECK(rep.find("macro_f1") != std::string::npos);
}

TEST_CASE("text report uses two decimals") {
    const auto text = format_report(report(baseline_matrix()));
    CHECK(text.find("     0.98      0.93      0.96       207  32    Water") != std::string::npos);
    CHECK(text.find("accuracy") != std::string::npos);
}

}
