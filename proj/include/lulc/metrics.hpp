#pragma once

#include "lulc/catalog.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lulc {

// Rows are true classes, columns predicted classes, both in catalog order.
struct ConfusionMatrix {
    ClassCatalog catalog;
    std::vector<std::int64_t> counts;  // K x K row-major

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(ClassCatalog cat);
    ConfusionMatrix(ClassCatalog cat, std::vector<std::int64_t> values);

    std::size_t classes() const { return catalog.size(); }
    std::int64_t& at(std::size_t truth, std::size_t pred) { return counts[truth * classes() + pred]; }
    std::int64_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes() + pred]; }

    std::int64_t total() const;
    std::int64_t trace() const;
    std::int64_t row_sum(std::size_t k) const;
    std::int64_t col_sum(std::size_t k) const;

    bool operator==(const ConfusionMatrix&) const = default;
};

// Labels are catalog indices.
ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted, const ClassCatalog& catalog);

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;

    bool operator==(const ClassScores&) const = default;
};

struct ClassReport {
    ClassCatalog catalog;
    std::vector<ClassScores> rows;
    double accuracy = 0.0;  // 0 for an empty matrix
    double macro_f1 = 0.0;

    bool operator==(const ClassReport&) const = default;
};

ClassReport report(const ConfusionMatrix& cm);

// trace / total; an empty matrix is an empty-sample error.
double overall_accuracy(const ConfusionMatrix& cm);

// Two-decimal table in the layout of a classification report.
std::string format_report(const ClassReport& rep);

void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path);
// Class codes in the CSV must match the catalog order.
ConfusionMatrix read_confusion_csv(const std::filesystem::path& path, const ClassCatalog& catalog);
void write_report_csv(const ClassReport& rep, const std::filesystem::path& path);

}  // namespace lulc
