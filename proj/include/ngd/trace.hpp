#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "ngd/model_core.hpp"

namespace ngd {

/// Per-iteration diagnostics. Row t describes the state before the t-th update
/// and the rates that update used; the last row has no rates.
struct IterationTrace {
    std::int64_t iteration = 0;
    double cond = 1.0;    // Cond(C^t A)
    double J = 0.0;       // m^T A m + Tr(C A)
    double norm_m = 0.0;
    double norm_C = 0.0;  // Frobenius
    double eta_m = std::numeric_limits<double>::quiet_NaN();
    double eta_C = std::numeric_limits<double>::quiet_NaN();
    double sigma1_Z = std::numeric_limits<double>::quiet_NaN();
};

struct StopRule {
    double target_J = 1e-10;
    std::int64_t max_iters = 100000;
};

/// Trace of one run, plus the final parameters.
struct RunResult {
    std::vector<IterationTrace> trace;
    GaussianParams final_params;
    bool reached_target = false;
};

/// Cond/J/norms of a state; rates left NaN.
IterationTrace diagnose(const GaussianParams& params, const Matrix& A, const Matrix& sqrt_A, std::int64_t t);

}  // namespace ngd
