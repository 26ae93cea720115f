#pragma once

// Experiment runner: flat key = value configs, seeded multi-trial batches,
// per-iteration aggregation and CSV output.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ngd/det_ngd.hpp"
#include "ngd/model_core.hpp"
#include "ngd/objectives.hpp"
#include "ngd/stoch_ngd.hpp"
#include "ngd/trace.hpp"

namespace ngd {

enum class Algorithm { det_ngd, stoch_ngd, cma_es };

std::string to_string(Algorithm a);

/// Sample-size spec: a literal count or one of sqrt-d, d, d^1.5, d^2, d^2.5, d^3.
struct SampleSize {
    std::string text = "d";
    /// Smallest integer >= the symbolic power of d.
    int resolve(int d) const;
};

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::stoch_ngd;
    int dimension = 20;
    /// Quadratic-form matrix; the ellipsoid unless `objective = file:<path>`.
    Matrix A;
    std::string objective_name = "ellipsoid";
    MonotoneTransform transform = MonotoneTransform::identity();

    SampleSize n_spec;
    int n = 0;  // resolved
    std::vector<int> n_grid;  // consistency reports only

    double c_C = 0.1;
    double alpha_m = 0.1;
    double alpha_C = 0.1;
    std::optional<double> cma_eta_C;  // overrides the standard CMA rate
    VhatExponent vhat_exponent = VhatExponent::mc_nu;

    Vector m0;
    Matrix C0;

    int trials = 50;
    std::uint64_t base_seed = 0;
    double target_J = 1e-10;
    std::int64_t max_iters = 100000;
    bool emit_theory = false;
    int threads = 0;  // 0: hardware concurrency

    GaussianParams initial_params() const { return {m0, C0}; }
    StopRule stop_rule() const { return {target_J, max_iters}; }

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Parses a key = value config. `#` starts a comment. Relative file paths are
/// resolved against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});

/// Reads and parses a config file.
ExperimentConfig resolve_config(const std::filesystem::path& path);

/// Whitespace-separated d rows of d numbers.
Matrix read_matrix_file(const std::filesystem::path& path);
Vector read_vector_file(const std::filesystem::path& path);

struct AggregateRow {
    std::int64_t iteration = 0;
    double mean_cond = 0.0;
    double std_cond = 0.0;
    double mean_J = 0.0;
    double std_J = 0.0;
    int survivors = 0;
    std::optional<double> theory_cond;
};

struct TrialFailure {
    int trial = 0;
    std::uint64_t seed = 0;
    std::string message;
};

struct BatchResult {
    /// Indexed by trial; failed trials hold an empty trace.
    std::vector<RunResult> runs;
    std::vector<TrialFailure> failures;
    std::vector<AggregateRow> rows;

    int succeeded() const { return static_cast<int>(runs.size() - failures.size()); }
};

/// Runs one trial with the given seed.
RunResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed);

/// Mean/std over the traces still running at each iteration.
std::vector<AggregateRow> aggregate(const std::vector<const std::vector<IterationTrace>*>& traces);

/// Normalized covariance rate the theory curve uses: alpha_C for the
/// deterministic algorithm, c_C / 2 for the stochastic one. Empty for CMA-ES.
std::optional<double> theory_alpha(const ExperimentConfig& cfg);

/// Trial k uses seed base_seed + k. Trials run on `cfg.threads` threads;
/// results do not depend on the thread count.
BatchResult run_batch(const ExperimentConfig& cfg);

void write_csv(const std::vector<AggregateRow>& rows, std::ostream& out);
void emit_csv(const std::vector<AggregateRow>& rows, const std::filesystem::path& path);
std::vector<AggregateRow> read_csv(std::istream& in);

struct ConsistencyRow {
    int n = 0;
    int seeds = 0;
    double mean_cos = 0.0;
    double std_cos = 0.0;
    double min_cos = 0.0;
    double q05 = 0.0;
    double median = 0.0;
    double q95 = 0.0;
    double max_cos = 0.0;
    bool mean_component_skipped = false;
};

/// Cosine similarity between the stacked estimate (dm, vec(dC)) and the closed
/// form (C A m, vec(C A C)). When C A m vanishes only the covariance parts are
/// compared.
double gradient_cosine(const NaturalGradient& estimate, const NaturalGradient& exact, bool* skipped_mean = nullptr);

/// Estimated-vs-exact gradient agreement at a fixed state for each n.
std::vector<ConsistencyRow> consistency_report(const QuadraticComposite& f, const GaussianParams& theta,
                                               const std::vector<int>& n_grid, int seeds, std::uint64_t base_seed,
                                               VhatExponent exponent = VhatExponent::mc_nu);

void write_consistency_csv(const std::vector<ConsistencyRow>& rows, std::ostream& out);

/// iter,theory_cond,geometric_bound for t = 0..iters. The geometric column
/// is predict_cond_upper_bound; it sits below theory_cond for t >= 1.
void write_theory_csv(double cond0, double alpha, std::int64_t iters, std::ostream& out);

}  // namespace ngd
