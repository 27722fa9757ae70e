#include "lulc/metrics.hpp"

#include "detail/csv.hpp"
#include "lulc/error.hpp"

#include <cstdio>
#include <numeric>
#include <sstream>

namespace lulc {

ConfusionMatrix::ConfusionMatrix(ClassCatalog cat) : catalog(std::move(cat)), counts(catalog.size() * catalog.size(), 0) {}

ConfusionMatrix::ConfusionMatrix(ClassCatalog cat, std::vector<std::int64_t> values)
    : catalog(std::move(cat)), counts(std::move(values)) {
    if (counts.size() != catalog.size() * catalog.size()) {
        fail(ErrorKind::shape, "confusion matrix needs " + std::to_string(catalog.size() * catalog.size()) + " counts");
    }
    for (auto v : counts) {
        if (v < 0) fail(ErrorKind::data, "confusion counts must be nonnegative");
    }
}

std::int64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::int64_t{0}); }

std::int64_t ConfusionMatrix::trace() const {
    std::int64_t t = 0;
    for (std::size_t k = 0; k < classes(); ++k) t += at(k, k);
    return t;
}

std::int64_t ConfusionMatrix::row_sum(std::size_t k) const {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < classes(); ++j) s += at(k, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t k) const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < classes(); ++i) s += at(i, k);
    return s;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, const ClassCatalog& catalog) {
    if (truth.size() != predicted.size()) {
        fail(ErrorKind::shape, "label sequences differ in length (" + std::to_string(truth.size()) + " vs " +
                                   std::to_string(predicted.size()) + ")");
    }
    ConfusionMatrix cm(catalog);
    const int k = static_cast<int>(catalog.size());
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= k || predicted[i] < 0 || predicted[i] >= k) {
            fail(ErrorKind::label, "label index outside the catalog at position " + std::to_string(i));
        }
        ++cm.at(truth[i], predicted[i]);
    }
    return cm;
}

ClassReport report(const ConfusionMatrix& cm) {
    ClassReport rep;
    rep.catalog = cm.catalog;
    double f1_sum = 0.0;
    for (std::size_t k = 0; k < cm.classes(); ++k) {
        ClassScores s;
        const auto tp = static_cast<double>(cm.at(k, k));
        const auto col = cm.col_sum(k);
        s.support = cm.row_sum(k);
        s.precision = col > 0 ? tp / static_cast<double>(col) : 0.0;
        s.recall = s.support > 0 ? tp / static_cast<double>(s.support) : 0.0;
        const double denom = s.precision + s.recall;
        s.f1 = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
        f1_sum += s.f1;
        rep.rows.push_back(s);
    }
    const auto total = cm.total();
    rep.accuracy = total > 0 ? static_cast<double>(cm.trace()) / static_cast<double>(total) : 0.0;
    rep.macro_f1 = cm.classes() > 0 ? f1_sum / static_cast<double>(cm.classes()) : 0.0;
    return rep;
}

double overall_accuracy(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total <= 0) fail(ErrorKind::empty_sample, "accuracy of an empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

std::string format_report(const ClassReport& rep) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%9s %9s %9s %9s  %-5s %s\n", "precision", "recall", "f1-score", "support", "ID",
                  "class");
    out << line;
    std::int64_t total = 0;
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        const auto& r = rep.rows[k];
        const auto& e = rep.catalog[k];
        std::snprintf(line, sizeof(line), "%9.2f %9.2f %9.2f %9lld  %-5s %s\n", r.precision, r.recall, r.f1,
                      static_cast<long long>(r.support), e.code.c_str(), e.name.c_str());
        out << line;
        total += r.support;
    }
    std::snprintf(line, sizeof(line), "\n%-19s %9.2f %9lld\n", "accuracy", rep.accuracy, static_cast<long long>(total));
    out << line;
    std::snprintf(line, sizeof(line), "%-19s %9.2f\n", "macro f1", rep.macro_f1);
    out << line;
    return out.str();
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path) {
    detail::CsvWriter csv;
    std::vector<std::string> header{"true\\pred"};
    for (const auto& e : cm.catalog.entries()) header.push_back(e.code);
    csv.row(header);
    for (std::size_t i = 0; i < cm.classes(); ++i) {
        std::vector<std::string> row{cm.catalog[i].code};
        for (std::size_t j = 0; j < cm.classes(); ++j) row.push_back(std::to_string(cm.at(i, j)));
        csv.row(row);
    }
    csv.save(path);
}

ConfusionMatrix read_confusion_csv(const std::filesystem::path& path, const ClassCatalog& catalog) {
    const auto rows = detail::read_csv(path);
    const std::size_t k = catalog.size();
    const std::string what = path.string();
    if (rows.size() != k + 1) fail(ErrorKind::format, what + ": expected " + std::to_string(k + 1) + " rows");
    for (std::size_t j = 0; j < k; ++j) {
        if (rows[0].size() != k + 1 || rows[0][j + 1] != catalog[j].code) {
            fail(ErrorKind::format, what + ": header does not match the catalog");
        }
    }
    std::vector<std::int64_t> counts;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != k + 1 || row[0] != catalog[i].code) fail(ErrorKind::format, what + ": row " + std::to_string(i) + " mismatch");
        for (std::size_t j = 0; j < k; ++j) counts.push_back(detail::parse_number<std::int64_t>(row[j + 1], what));
    }
    try {
        return ConfusionMatrix(catalog, std::move(counts));
    } catch (const Error& e) {
        fail(ErrorKind::format, what + ": " + e.what());
    }
}

void write_report_csv(const ClassReport& rep, const std::filesystem::path& path) {
    detail::CsvWriter csv;
    csv.row("class_index", "class_id", "name", "precision", "recall", "f1", "support");
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        const auto& r = rep.rows[k];
        const auto& e = rep.catalog[k];
        csv.row(e.index, e.code, e.name, r.precision, r.recall, r.f1, r.support);
    }
    csv.row("overall_accuracy", "", "", rep.accuracy, "", "", "");
    csv.row("macro_f1", "", "", rep.macro_f1, "", "", "");
    csv.save(path);
}

}  // namespace lulc
