// Command-line front end for the experiment harness.
//
//   ngd run         --config <file> --out <csv>
//   ngd theory      --cond0 <r> --alpha <a> --iters <t> --out <csv>
//   ngd consistency --config <file> --out <csv>

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ngd/errors.hpp"
#include "ngd/harness.hpp"

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    return out;
}

int cmd_run(const std::string& config, const std::string& out_path) {
    const ngd::ExperimentConfig cfg = ngd::resolve_config(config);
    const ngd::BatchResult batch = ngd::run_batch(cfg);
    for (const auto& f : batch.failures)
        std::cerr << "trial " << f.trial << " (seed " << f.seed << ") failed: " << f.message << '\n';
    int reached = 0;
    for (const auto& r : batch.runs) reached += r.reached_target ? 1 : 0;
    ngd::emit_csv(batch.rows, out_path);
    std::cerr << ngd::to_string(cfg.algorithm) << " d=" << cfg.dimension << " n=" << cfg.n << ": "
              << batch.succeeded() << "/" << cfg.trials << " trials completed, " << reached
              << " reached target_J, " << batch.rows.size() << " rows -> " << out_path << '\n';
    return 0;
}

int cmd_theory(double cond0, double alpha, std::int64_t iters, const std::string& out_path) {
    if (iters < 0) throw ngd::InvalidInput("--iters must be >= 0");
    auto out = open_out(out_path);
    ngd::write_theory_csv(cond0, alpha, iters, out);
    if (!out.flush()) throw std::runtime_error("write to " + out_path + " failed");
    return 0;
}

int cmd_consistency(const std::string& config, const std::string& out_path) {
    const ngd::ExperimentConfig cfg = ngd::resolve_config(config);
    std::vector<int> grid = cfg.n_grid.empty() ? std::vector<int>{cfg.n} : cfg.n_grid;
    const ngd::QuadraticComposite f(cfg.A, cfg.transform);
    const auto rows =
        ngd::consistency_report(f, cfg.initial_params(), grid, cfg.trials, cfg.base_seed, cfg.vhat_exponent);
    auto out = open_out(out_path);
    ngd::write_consistency_csv(rows, out);
    if (!out.flush()) throw std::runtime_error("write to " + out_path + " failed");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Natural-gradient CMA-ES variants: experiment runner"};
    app.require_subcommand(1);

    std::string config, out;
    auto* run = app.add_subcommand("run", "Run a seeded batch and write per-iteration aggregates");
    run->add_option("--config", config, "Experiment config file")->required();
    run->add_option("--out", out, "Output CSV")->required();

    double cond0 = 1.0, alpha = 0.1;
    std::int64_t iters = 0;
    auto* theory = app.add_subcommand("theory", "Write the predicted condition-number curve");
    theory->add_option("--cond0", cond0, "Initial Cond(C A)")->required();
    theory->add_option("--alpha", alpha, "Normalized covariance rate in (0, 1/2]")->required();
    theory->add_option("--iters", iters, "Number of iterations")->required();
    theory->add_option("--out", out, "Output CSV")->required();

    auto* consistency = app.add_subcommand("consistency", "Estimated vs closed-form natural gradient");
    consistency->add_option("--config", config, "Config with m0, C0, objective, n_grid, trials, base_seed")
        ->required();
    consistency->add_option("--out", out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config, out);
        if (theory->parsed()) return cmd_theory(cond0, alpha, iters, out);
        if (consistency->parsed()) return cmd_consistency(config, out);
    } catch (const ngd::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ngd::BatchError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
