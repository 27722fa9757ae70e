#pragma once

#include "lulc/catalog.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace lulc {

struct TsneConfig {
    double perplexity = 30.0;
    int iterations = 1000;
    double learning_rate = 200.0;
    double exaggeration = 12.0;
    int exaggeration_iterations = 250;
    double momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch = 250;
    double init_sd = 1e-4;
    std::uint64_t seed = 0;
};

// Joint affinities of the exact algorithm.
struct Affinities {
    std::size_t n = 0;
    std::vector<double> p;                // n x n, symmetric, sums to 1
    std::vector<double> row_perplexity;   // achieved by each conditional row
    std::vector<double> beta;             // precision 1 / (2 sigma^2) per row
};

// Per-row bisection on the Gaussian precision until the conditional entropy
// is within 1e-5 nats of log(perplexity), at most 50 steps.
Affinities compute_affinities(std::span<const double> x, std::size_t n, std::size_t dim, double perplexity);

struct TsneResult {
    std::vector<double> y;           // n x 2
    std::vector<double> kl_history;  // KL(P || Q) after each iteration, unexaggerated P
};

TsneResult tsne(std::span<const double> x, std::size_t n, std::size_t dim, const TsneConfig& config = {});

void write_tsne_csv(std::span<const double> y, std::span<const int> labels, const std::filesystem::path& path);
void write_kl_csv(std::span<const double> kl_history, const std::filesystem::path& path);
void write_tsne_svg(std::span<const double> y, std::span<const int> labels, const ClassCatalog& catalog,
                    const std::filesystem::path& path);

}  // namespace lulc
