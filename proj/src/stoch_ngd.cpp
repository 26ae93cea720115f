#include "ngd/stoch_ngd.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "ngd/detail/order.hpp"
#include "ngd/errors.hpp"

namespace ngd {

void StochSchedule::validate() const {
    if (!(c_C > 0.0 && c_C <= 1.0)) throw InvalidInput("StochSchedule: c_C must lie in (0, 1]");
    if (!(guard_margin > 0.0 && guard_margin <= 1.0))
        throw InvalidInput("StochSchedule: guard_margin must lie in (0, 1]");
}

SamplePopulation sample_population(const GaussianParams& params, int n, RngStream& rng, const Objective& f) {
    if (n < 2) throw InvalidInput("sample_population: n must be >= 2");
    const auto d = params.dim();
    if (f.dim() != d) throw InvalidInput("sample_population: objective dimension mismatch");

    const SymEigen eig = sym_eigen(params.covariance);
    SamplePopulation pop;
    pop.sqrt_C = matrix_sqrt(eig);  // throws DomainError for non-PD C
    pop.log_det_C = eig.eigenvalues.array().log().sum();
    pop.z = rng.normal_matrix(d, n);
    pop.x = (pop.sqrt_C * pop.z).colwise() + params.mean;
    pop.fvals = f.evaluate_columns(pop.x);
    return pop;
}

Vector estimate_log_invariant_cost(const Vector& fvals, const Matrix& z, double log_det_D, VhatExponent exponent) {
    const auto n = fvals.size();
    const auto d = z.rows();
    if (z.cols() != n) throw InvalidInput("estimate_invariant_cost: z and fvals disagree on n");
    if (n == 0) return Vector();
    if (!std::isfinite(log_det_D)) throw InvalidInput("estimate_invariant_cost: det(D) must be finite and > 0");
    for (Eigen::Index i = 0; i < n; ++i)
        if (std::isnan(fvals[i])) throw InvalidInput("estimate_invariant_cost: NaN objective value");

    const double log_const = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + 0.5 * log_det_D -
                             std::log(static_cast<double>(n));
    const Vector half_sq = 0.5 * z.colwise().squaredNorm().transpose();

    // Running log-sum-exp over samples in ascending f; a tie group shares the
    // sum that includes all of its members.
    const auto order = detail::ascending_order(fvals);
    Vector out(n);
    double run_max = -std::numeric_limits<double>::infinity();
    double run_sum = 0.0;
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k;
        while (end < order.size() && fvals[order[end]] == fvals[order[k]]) {
            const double a = half_sq[order[end]];
            if (a > run_max) {
                run_sum = run_sum * std::exp(run_max - a) + 1.0;
                run_max = a;
            } else {
                run_sum += std::exp(a - run_max);
            }
            ++end;
        }
        const double lse = run_max + std::log(run_sum);
        for (std::size_t j = k; j < end; ++j) out[order[j]] = log_const + lse;
        k = end;
    }
    if (exponent == VhatExponent::mc_nu) out *= 2.0 / static_cast<double>(d);
    return out;
}

Vector estimate_invariant_cost(const SamplePopulation& pop, double detD, int n, int d) {
    if (!(detD > 0.0)) throw InvalidInput("estimate_invariant_cost: det(D) must be > 0");
    if (pop.z.rows() != d || pop.z.cols() != pop.fvals.size())
        throw InvalidInput("estimate_invariant_cost: population shape mismatch");
    if (n < 1) throw InvalidInput("estimate_invariant_cost: n must be >= 1");
    Vector logv = estimate_log_invariant_cost(pop.fvals, pop.z, std::log(detD));
    // estimate_log_invariant_cost divides by the population size; honor the caller's n.
    logv.array() += std::log(static_cast<double>(pop.fvals.size())) - std::log(static_cast<double>(n));
    Vector v = logv.array().exp();
    if (!v.allFinite()) throw NumericError("estimate_invariant_cost: overflow");
    return v;
}

Weights compute_weights(const Vector& vhat, int n) {
    if (n < 1 || vhat.size() != n) throw InvalidInput("compute_weights: size mismatch");
    Weights out;
    out.baseline = vhat.sum() / n;
    out.w = (vhat.array() - out.baseline) / static_cast<double>(n);
    return out;
}

NaturalGradient estimate_gradient(const Matrix& x, const Vector& weights, const GaussianParams& params) {
    const auto d = params.dim();
    if (x.rows() != d || x.cols() != weights.size()) throw InvalidInput("estimate_gradient: shape mismatch");
    const Matrix y = x.colwise() - params.mean;
    NaturalGradient g;
    g.delta_m = y * weights;
    g.delta_C = symmetrize(y * weights.asDiagonal() * y.transpose() - weights.sum() * params.covariance);
    return g;
}

NaturalGradient estimate_gradient(const SamplePopulation& pop, const GaussianParams& params) {
    if (pop.weights.size() != pop.size()) throw InvalidInput("estimate_gradient: weights not computed");
    if (pop.Z.rows() != pop.dim() || pop.sqrt_C.rows() != params.dim())
        return estimate_gradient(pop.x, pop.weights, params);
    // x_i - m = sqrt(C) z_i, so dC = sqrt(C) Z sqrt(C): saves one d x n product.
    NaturalGradient g;
    g.delta_m = pop.sqrt_C * (pop.z * pop.weights);
    g.delta_C = symmetrize(pop.sqrt_C * pop.Z * pop.sqrt_C);
    return g;
}

Matrix z_matrix(const Matrix& z, const Vector& weights) {
    if (z.cols() != weights.size()) throw InvalidInput("z_matrix: shape mismatch");
    const auto d = z.rows();
    return symmetrize(z * weights.asDiagonal() * z.transpose() - weights.sum() * Matrix::Identity(d, d));
}

Matrix z_matrix(const SamplePopulation& pop) {
    if (pop.weights.size() != pop.size()) throw InvalidInput("z_matrix: weights not computed");
    return z_matrix(pop.z, pop.weights);
}

void assign_weights(SamplePopulation& pop, VhatExponent exponent, bool rescale) {
    const auto n = static_cast<int>(pop.size());
    pop.log_vhat = estimate_log_invariant_cost(pop.fvals, pop.z, pop.log_det_C, exponent);
    pop.vhat_log_shift = rescale ? pop.log_vhat.maxCoeff() : 0.0;
    pop.vhat = (pop.log_vhat.array() - pop.vhat_log_shift).exp();
    if (!pop.vhat.allFinite()) throw NumericError("invariant-cost estimate overflowed");
    Weights w = compute_weights(pop.vhat, n);
    pop.baseline = w.baseline;
    pop.weights = std::move(w.w);
    pop.Z = z_matrix(pop);
}

GaussianParams apply_update(const GaussianParams& params, const NaturalGradient& grad, double eta_m, double eta_C) {
    GaussianParams next;
    next.mean = params.mean - eta_m * grad.delta_m;
    next.covariance = symmetrize(params.covariance - eta_C * grad.delta_C);
    return next;
}

StepOutcome stoch_step(const GaussianParams& params, const SamplePopulation& pop, const StochSchedule& sched) {
    if (pop.Z.rows() != params.dim()) throw InvalidInput("stoch_step: population has no Z matrix");
    StepOutcome out;
    const Vector ev =
        Eigen::SelfAdjointEigenSolver<Matrix>(pop.Z, Eigen::EigenvaluesOnly).eigenvalues();
    out.sigma1_Z = ev.cwiseAbs().maxCoeff();
    if (!(out.sigma1_Z > 0.0)) {
        out.params = params;
        out.skipped = true;
        return out;
    }
    out.eta_m = 1.0 / out.sigma1_Z;
    out.eta_C = sched.c_C / (2.0 * out.sigma1_Z);
    if (!(out.eta_C * ev.maxCoeff() < sched.guard_margin))
        throw InternalError("stoch_step: covariance rate violates the positivity condition");

    out.params = apply_update(params, estimate_gradient(pop, params), out.eta_m, out.eta_C);
    if (!out.params.mean.allFinite() || !out.params.covariance.allFinite())
        throw NumericError("stoch_step: non-finite parameters");
    return out;
}

RunResult run_stochastic(const Objective& f, const GaussianParams& init, int n, const StochSchedule& sched,
                         RngStream& rng, const StopRule& stop, const Matrix& A) {
    sched.validate();
    init.validate();
    if (n < 2) throw InvalidInput("run_stochastic: n must be >= 2");
    if (A.rows() != init.dim() || f.dim() != init.dim()) throw InvalidInput("run_stochastic: dimension mismatch");
    const Matrix sqrt_A = matrix_sqrt(A);

    RunResult result;
    GaussianParams params = init;
    for (std::int64_t t = 0;; ++t) {
        IterationTrace row = diagnose(params, A, sqrt_A, t);
        const bool done = row.J <= stop.target_J;
        if (done || t >= stop.max_iters) {
            result.trace.push_back(row);
            result.reached_target = done;
            break;
        }
        SamplePopulation pop = sample_population(params, n, rng, f);
        assign_weights(pop, sched.vhat_exponent, true);
        StepOutcome step = stoch_step(params, pop, sched);
        // Undo the rescaling of V-hat: report sigma_1 and rates of the unscaled Z.
        if (step.skipped) {
            row.sigma1_Z = 0.0;
            row.eta_m = row.eta_C = 0.0;
        } else {
            row.sigma1_Z = std::exp(std::log(step.sigma1_Z) + pop.vhat_log_shift);
            row.eta_m = 1.0 / row.sigma1_Z;
            row.eta_C = sched.c_C / (2.0 * row.sigma1_Z);
        }
        result.trace.push_back(row);
        params = std::move(step.params);
    }
    result.final_params = params;
    return result;
}

}  // namespace ngd
