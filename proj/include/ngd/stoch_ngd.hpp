#pragma once

// Stochastic natural-gradient descent: Monte-Carlo estimate of the invariant
// cost, mean baseline, and learning rates normalized by the spectral norm of Z.

#include <cstdint>

#include "ngd/model_core.hpp"
#include "ngd/objectives.hpp"
#include "ngd/rng.hpp"
#include "ngd/trace.hpp"

namespace ngd {

/// Which estimator of the invariant cost to use.
///   step6:  (2 pi)^{d/2} det(D)^{1/2} / n * sum_{f_j <= f_i} exp(|z_j|^2 / 2)
///   mc_nu:  the same quantity raised to the power 2/d
/// The two coincide for d = 2. Only mc_nu estimates Leb^{2/d} of the sublevel
/// set, the cost whose natural gradient the deterministic algorithm follows,
/// so it is the default for the optimizer loop.
enum class VhatExponent { step6, mc_nu };

struct SamplePopulation {
    Matrix z;   // d x n standard normals
    Matrix x;   // d x n search points, x_i = m + sqrt(C) z_i
    Vector fvals;
    Matrix sqrt_C;
    double log_det_C = 0.0;

    // Filled by assign_costs / assign_weights.
    Vector log_vhat;
    /// exp(log_vhat - vhat_log_shift). The shift is 0 unless the caller asked
    /// for a rescaled population; every update is invariant to it.
    Vector vhat;
    double vhat_log_shift = 0.0;
    double baseline = 0.0;
    Vector weights;
    Matrix Z;

    Eigen::Index dim() const { return z.rows(); }
    Eigen::Index size() const { return z.cols(); }
};

struct StochSchedule {
    double c_C = 1.0;
    /// Positivity guard: refuse updates with eta_C * lambda_max(Z) >= guard_margin.
    double guard_margin = 1.0;
    VhatExponent vhat_exponent = VhatExponent::mc_nu;

    void validate() const;
};

/// Steps 1-5: draw n standard normals from `rng` (column by column), map them
/// through sqrt(C) and evaluate f.
SamplePopulation sample_population(const GaussianParams& params, int n, RngStream& rng, const Objective& f);

/// log of the step-6 estimate for every sample. `log_det_D` is sum(log eig(C)).
Vector estimate_log_invariant_cost(const Vector& fvals, const Matrix& z, double log_det_D,
                                   VhatExponent exponent = VhatExponent::step6);

/// The step-6 estimate itself, V-hat(x_i) for i = 1..n; `n` is the divisor.
Vector estimate_invariant_cost(const SamplePopulation& pop, double detD, int n, int d);

struct Weights {
    double baseline = 0.0;
    Vector w;
};

/// b = mean(vhat), w_i = (vhat_i - b) / n.
Weights compute_weights(const Vector& vhat, int n);

/// (sum w_i (x_i - m), sum w_i ((x_i - m)(x_i - m)^T - C)).
NaturalGradient estimate_gradient(const Matrix& x, const Vector& weights, const GaussianParams& params);
NaturalGradient estimate_gradient(const SamplePopulation& pop, const GaussianParams& params);

/// sum w_i (z_i z_i^T - I).
Matrix z_matrix(const Matrix& z, const Vector& weights);
Matrix z_matrix(const SamplePopulation& pop);

/// Fills log_vhat, vhat (rescaled so max = 1 when `rescale`), baseline, weights and Z.
void assign_weights(SamplePopulation& pop, VhatExponent exponent, bool rescale);

struct StepOutcome {
    GaussianParams params;
    double eta_m = 0.0;
    double eta_C = 0.0;
    double sigma1_Z = 0.0;
    bool skipped = false;
};

/// m - eta_m dm, C - eta_C dC without any guard.
GaussianParams apply_update(const GaussianParams& params, const NaturalGradient& grad, double eta_m, double eta_C);

/// Steps 10-11 with eta_m = 1 / sigma_1(Z), eta_C = c_C / (2 sigma_1(Z)).
/// sigma_1(Z) == 0 yields a skipped update with unchanged parameters.
StepOutcome stoch_step(const GaussianParams& params, const SamplePopulation& pop, const StochSchedule& sched);

/// Full loop. `A` is used for diagnostics only; the optimizer sees f alone.
RunResult run_stochastic(const Objective& f, const GaussianParams& init, int n, const StochSchedule& sched,
                         RngStream& rng, const StopRule& stop, const Matrix& A);

}  // namespace ngd
