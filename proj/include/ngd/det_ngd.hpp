#pragma once

// Deterministic natural-gradient descent on monotonic convex-quadratic
// composites, with the closed-form predictors for its condition-number decay.

#include <cstdint>
#include <vector>

#include "ngd/model_core.hpp"
#include "ngd/trace.hpp"

namespace ngd {

/// Normalized rates: eta_m = alpha_m / lambda_1, eta_C = alpha_C / lambda_1
/// with lambda_1 = lambda_max(C^-1 dC) = lambda_max(sqrt(A) C sqrt(A)).
struct DetSchedule {
    double alpha_m = 0.1;
    double alpha_C = 0.1;

    void validate() const;
};

struct DetState {
    GaussianParams params;
    std::int64_t iteration = 0;
    /// F with C = F F^T. Carried between steps so the covariance update runs
    /// in square-root form; taken as the Cholesky factor of C when empty.
    Matrix factor;
};

struct DetStepInfo {
    double lambda1 = 0.0;
    double eta_m = 0.0;
    double eta_C = 0.0;
};

/// One update m -= eta_m C A m, C -= eta_C C A C. The covariance is updated
/// as F <- F chol(I - eta_C G^T G) with G = sqrt(A) F, which equals the
/// plain update but keeps Cond(C A) accurate to near machine precision
/// when A is ill-conditioned.
DetState det_step(const DetState& state, const Matrix& A, const DetSchedule& sched);

/// Variant with sqrt(A) precomputed; fills `info` when non-null.
DetState det_step(const DetState& state, const Matrix& A, const Matrix& sqrt_A, const DetSchedule& sched,
                  DetStepInfo* info = nullptr);

/// Iterates Cond' = Cond (1 - alpha) / (1 - alpha / Cond) `t` times.
double predict_cond_recurrence(double cond0, double alpha, std::int64_t t);

/// Whole trajectory of the recurrence, t + 1 values starting with cond0.
std::vector<double> predict_cond_sequence(double cond0, double alpha, std::int64_t t);

/// 1 + ((1 - 2 gamma) / (1 - gamma))^t (cond0 - 1).
double predict_cond_upper_bound(double cond0, double gamma_min, std::int64_t t);

/// Asymptotic contraction factor (1 - 2 alpha) / (1 - alpha) of Cond - 1.
double cond_rate_factor(double alpha);

/// Runs det_step until J <= stop.target_J or stop.max_iters updates.
RunResult run_deterministic(const Matrix& A, const GaussianParams& init, const DetSchedule& sched,
                            const StopRule& stop = {});

}  // namespace ngd
