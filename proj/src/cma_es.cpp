#include "ngd/cma_es.hpp"

#include <cmath>

#include "ngd/detail/order.hpp"
#include "ngd/errors.hpp"
#include "ngd/stoch_ngd.hpp"

namespace ngd {

CmaWeights CmaWeights::intermediate(int n) {
    if (n < 4) throw InvalidInput("CmaWeights: n must be >= 4 so that floor(n/4) >= 1");
    CmaWeights w;
    w.n = n;
    w.mu = n / 4;
    w.by_rank.assign(static_cast<std::size_t>(n), 0.0);
    for (int r = 0; r < w.mu; ++r) w.by_rank[static_cast<std::size_t>(r)] = 1.0 / w.mu;
    return w;
}

double CmaWeights::mu_w() const {
    double sq = 0.0;
    for (double v : by_rank) sq += v * v;
    return 1.0 / sq;
}

CmaSchedule CmaSchedule::standard(int d, const CmaWeights& w) {
    if (d < 1) throw InvalidInput("CmaSchedule: d must be >= 1");
    CmaSchedule s;
    s.mu_w = w.mu_w();
    s.eta_m = 1.0;
    s.eta_C = (2.0 * s.mu_w - 1.0) / ((d + 2.0) * (d + 2.0) + s.mu_w);
    return s;
}

std::vector<int> rank_samples(const Vector& fvals) {
    if (fvals.size() < 1) throw InvalidInput("rank_samples: empty input");
    if (!fvals.allFinite()) throw InvalidInput("rank_samples: non-finite objective value");
    const auto order = detail::ascending_order(fvals);
    std::vector<int> ranks(order.size());
    std::size_t k = 0;
    while (k < order.size()) {
        std::size_t end = k;
        while (end < order.size() && fvals[order[end]] == fvals[order[k]]) ++end;
        for (std::size_t j = k; j < end; ++j) ranks[static_cast<std::size_t>(order[j])] = static_cast<int>(end);
        k = end;
    }
    return ranks;
}

Vector selection_weights(const std::vector<int>& ranks, const CmaWeights& w) {
    if (static_cast<int>(ranks.size()) != w.n) throw InvalidInput("selection_weights: size mismatch");
    Vector out(w.n);
    for (int i = 0; i < w.n; ++i) out[i] = w.weight_for_rank(ranks[static_cast<std::size_t>(i)]);
    return out;
}

GaussianParams cma_step(const GaussianParams& params, const Matrix& x, const std::vector<int>& ranks,
                        const CmaSchedule& sched, const CmaWeights& w) {
    if (x.rows() != params.dim() || x.cols() != w.n) throw InvalidInput("cma_step: shape mismatch");
    const Vector sel = selection_weights(ranks, w);
    // Cost-style weights are -sel; apply_update subtracts, so pass -eta.
    const NaturalGradient g = estimate_gradient(x, sel, params);
    GaussianParams next = apply_update(params, g, -sched.eta_m, -sched.eta_C);
    if (!next.mean.allFinite() || !next.covariance.allFinite()) throw NumericError("cma_step: non-finite parameters");
    return next;
}

RunResult run_cma(const Objective& f, const GaussianParams& init, int n, const CmaSchedule& sched, RngStream& rng,
                  const StopRule& stop, const Matrix& A) {
    init.validate();
    if (A.rows() != init.dim() || f.dim() != init.dim()) throw InvalidInput("run_cma: dimension mismatch");
    if (!(sched.eta_C > 0.0 && sched.eta_C < 1.0)) throw InvalidInput("run_cma: eta_C must lie in (0, 1)");
    const CmaWeights w = CmaWeights::intermediate(n);
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
        const SamplePopulation pop = sample_population(params, n, rng, f);
        params = cma_step(params, pop.x, rank_samples(pop.fvals), sched, w);
        row.eta_m = sched.eta_m;
        row.eta_C = sched.eta_C;
        result.trace.push_back(row);
    }
    result.final_params = params;
    return result;
}

RunResult run_cma(const Objective& f, const GaussianParams& init, int n, RngStream& rng, const StopRule& stop,
                  const Matrix& A) {
    return run_cma(f, init, n, CmaSchedule::standard(static_cast<int>(init.dim()), CmaWeights::intermediate(n)), rng,
                   stop, A);
}

}  // namespace ngd
