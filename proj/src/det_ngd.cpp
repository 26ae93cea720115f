#include "ngd/det_ngd.hpp"

#include <cmath>

#include "ngd/errors.hpp"
#include "ngd/objectives.hpp"

namespace ngd {

IterationTrace diagnose(const GaussianParams& params, const Matrix& A, const Matrix& sqrt_A, std::int64_t t) {
    IterationTrace row;
    row.iteration = t;
    row.cond = cond_product_sqrt(params.covariance, sqrt_A);
    row.J = expected_objective(params, A);
    row.norm_m = params.mean.norm();
    row.norm_C = params.covariance.norm();
    return row;
}

void DetSchedule::validate() const {
    if (!(alpha_m > 0.0 && alpha_m <= 1.0)) throw InvalidInput("DetSchedule: alpha_m must lie in (0, 1]");
    if (!(alpha_C > 0.0 && alpha_C <= 0.5)) throw InvalidInput("DetSchedule: alpha_C must lie in (0, 1/2]");
}

DetState det_step(const DetState& state, const Matrix& A, const Matrix& sqrt_A, const DetSchedule& sched,
                  DetStepInfo* info) {
    const Matrix& C = state.params.covariance;
    const Vector& m = state.params.mean;
    const auto d = m.size();
    if (A.rows() != d || C.rows() != d || sqrt_A.rows() != d) throw InvalidInput("det_step: dimension mismatch");

    Matrix F = state.factor;
    if (F.rows() != d || F.cols() != d) {
        Eigen::LLT<Matrix> llt(symmetrize(C));
        if (llt.info() != Eigen::Success) throw DomainError("det_step: C is not positive definite");
        F = llt.matrixL();
    }
    // G^T G = F^T A F shares its eigenvalues with sqrt(A) C sqrt(A).
    const Matrix G = sqrt_A * F;
    const Matrix S = symmetrize(G.transpose() * G);
    const double lambda1 = max_eigenvalue(S);
    if (!(lambda1 > 0.0)) throw InternalError("det_step: lambda_1 <= 0 for positive-definite inputs");
    const double eta_m = sched.alpha_m / lambda1;
    const double eta_C = sched.alpha_C / lambda1;

    // C - eta_C C A C = F (I - eta_C S) F^T; I - eta_C S has eigenvalues in [1 - alpha_C, 1).
    const Matrix M = Matrix::Identity(d, d) - eta_C * S;
    Eigen::LLT<Matrix> shrink(M);
    if (shrink.info() != Eigen::Success) throw NumericError("det_step: I - eta_C F^T A F is not positive definite");

    DetState next;
    next.params.mean = m - eta_m * (C * (A * m));
    next.factor = F * shrink.matrixL().toDenseMatrix();
    // Reported C from the current factor; the next step works from next.factor.
    next.params.covariance = symmetrize(F * M * F.transpose());
    next.iteration = state.iteration + 1;
    if (!next.params.mean.allFinite() || !next.factor.allFinite())
        throw NumericError("det_step: non-finite parameters");
    if (info) *info = {lambda1, eta_m, eta_C};
    return next;
}

DetState det_step(const DetState& state, const Matrix& A, const DetSchedule& sched) {
    sched.validate();
    return det_step(state, A, matrix_sqrt(A), sched);
}

double cond_rate_factor(double alpha) { return (1.0 - 2.0 * alpha) / (1.0 - alpha); }

double predict_cond_recurrence(double cond0, double alpha, std::int64_t t) {
    if (!(alpha > 0.0 && alpha <= 0.5)) throw InvalidInput("predict_cond_recurrence: alpha must lie in (0, 1/2]");
    if (!(cond0 >= 1.0)) throw InvalidInput("predict_cond_recurrence: cond0 must be >= 1");
    if (t < 0) throw InvalidInput("predict_cond_recurrence: t must be >= 0");
    double cond = cond0;
    for (std::int64_t k = 0; k < t; ++k) cond = std::max(1.0, cond * (1.0 - alpha) / (1.0 - alpha / cond));
    return cond;
}

std::vector<double> predict_cond_sequence(double cond0, double alpha, std::int64_t t) {
    predict_cond_recurrence(cond0, alpha, 0);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(t + 1));
    double cond = cond0;
    out.push_back(cond);
    for (std::int64_t k = 0; k < t; ++k) {
        cond = std::max(1.0, cond * (1.0 - alpha) / (1.0 - alpha / cond));
        out.push_back(cond);
    }
    return out;
}

double predict_cond_upper_bound(double cond0, double gamma_min, std::int64_t t) {
    if (!(gamma_min > 0.0 && gamma_min <= 0.5))
        throw InvalidInput("predict_cond_upper_bound: gamma_min must lie in (0, 1/2]");
    if (!(cond0 >= 1.0)) throw InvalidInput("predict_cond_upper_bound: cond0 must be >= 1");
    if (t < 0) throw InvalidInput("predict_cond_upper_bound: t must be >= 0");
    if (t == 0) return cond0;
    return 1.0 + std::pow(cond_rate_factor(gamma_min), static_cast<double>(t)) * (cond0 - 1.0);
}

RunResult run_deterministic(const Matrix& A, const GaussianParams& init, const DetSchedule& sched,
                            const StopRule& stop) {
    sched.validate();
    init.validate();
    if (A.rows() != init.dim() || A.cols() != init.dim()) throw InvalidInput("run_deterministic: dimension mismatch");
    const Matrix sqrt_A = matrix_sqrt(A);

    RunResult result;
    DetState state{init, 0, {}};
    while (true) {
        IterationTrace row = diagnose(state.params, A, sqrt_A, state.iteration);
        if (state.factor.size()) row.cond = cond_product_factor(state.factor, sqrt_A);
        const bool done = row.J <= stop.target_J;
        if (done || state.iteration >= stop.max_iters) {
            result.trace.push_back(row);
            result.reached_target = done;
            break;
        }
        DetStepInfo info;
        state = det_step(state, A, sqrt_A, sched, &info);
        row.eta_m = info.eta_m;
        row.eta_C = info.eta_C;
        result.trace.push_back(row);
    }
    result.final_params = state.params;
    return result;
}

}  // namespace ngd
