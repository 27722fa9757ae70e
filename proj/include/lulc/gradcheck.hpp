#pragma once

#include "lulc/nn.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lulc {

struct GradCheckOptions {
    int batch = 4;
    int samples_per_tensor = 16;  // coordinates probed per tensor (all of them if smaller)
    double step = 1e-5;
    double floor = 1e-6;          // denominator floor of the relative error
};

struct TensorCheck {
    std::string name;
    int probed = 0;
    int skipped = 0;  // coordinates whose finite-difference stencil crosses a ReLU kink
    double max_rel_error = 0.0;
};

struct GradCheckResult {
    std::vector<TensorCheck> tensors;
    double max_rel_error = 0.0;
};

// Compares backward() against central differences of the train-mode loss in
// double precision, with the dropout noise sampled once and held fixed.
// Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult check_gradients(const Architecture& arch, std::uint64_t seed, const GradCheckOptions& options = {});

}  // namespace lulc
