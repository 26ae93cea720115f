#pragma once

// Pure rank-mu update CMA-ES with intermediate recombination: no evolution
// paths, no step-size control.
//
// Selection weights are positive on good points and the update adds the
// weighted estimate. In terms of the stochastic NGD code path this is
// w_i^cma = -w_i^ngd, so both share estimate_gradient().
//
// Eligibility reads the intermediate-weight condition as R_i <= floor(n/4)
// (rank count, not rank fraction), the reading consistent with mu_w = mu.

#include <cstdint>
#include <vector>

#include "ngd/model_core.hpp"
#include "ngd/objectives.hpp"
#include "ngd/rng.hpp"
#include "ngd/trace.hpp"

namespace ngd {

struct CmaWeights {
    int n = 0;
    int mu = 0;
    /// Weight for rank r stored at index r - 1.
    std::vector<double> by_rank;

    /// 1/mu on ranks 1..floor(n/4), 0 elsewhere. Needs n >= 4.
    static CmaWeights intermediate(int n);

    double mu_w() const;
    double weight_for_rank(int rank) const { return by_rank.at(static_cast<std::size_t>(rank - 1)); }
};

struct CmaSchedule {
    double eta_m = 1.0;
    double eta_C = 0.0;
    double mu_w = 0.0;

    /// eta_m = 1, eta_C = (2 mu_w - 1) / ((d + 2)^2 + mu_w).
    static CmaSchedule standard(int d, const CmaWeights& w);
};

/// R_i = |{j : f_j <= f_i}|, so tied values share the larger rank.
std::vector<int> rank_samples(const Vector& fvals);

/// Per-sample selection weights from ranks.
Vector selection_weights(const std::vector<int>& ranks, const CmaWeights& w);

/// m + eta_m sum w_i (x_i - m),  C + eta_C sum w_i ((x_i - m)(x_i - m)^T - C).
GaussianParams cma_step(const GaussianParams& params, const Matrix& x, const std::vector<int>& ranks,
                        const CmaSchedule& sched, const CmaWeights& w);

RunResult run_cma(const Objective& f, const GaussianParams& init, int n, RngStream& rng, const StopRule& stop,
                  const Matrix& A);

/// Same loop with an explicit schedule.
RunResult run_cma(const Objective& f, const GaussianParams& init, int n, const CmaSchedule& sched, RngStream& rng,
                  const StopRule& stop, const Matrix& A);

}  // namespace ngd
