#include "ngd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "ngd/cma_es.hpp"
#include "ngd/errors.hpp"

namespace ngd {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::det_ngd: return "det-ngd";
        case Algorithm::stoch_ngd: return "stoch-ngd";
        case Algorithm::cma_es: return "cma-es";
    }
    return "?";
}

namespace {

// Smallest k >= 0 with k^2 >= v.
std::int64_t ceil_sqrt(std::int64_t v) {
    auto k = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
    while (k * k < v) ++k;
    while (k > 0 && (k - 1) * (k - 1) >= v) --k;
    return k;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry {
    std::string value;
    int line = 0;
};

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "algorithm", "dimension", "objective", "transform", "n",         "n_grid",   "c_C",
        "alpha",     "alpha_m",   "alpha_C",   "eta_C",     "vhat_exponent", "m0",   "C0",
        "trials",    "base_seed", "target_J",  "max_iters", "emit_theory",   "threads"};
    return keys;
}

double parse_double(const std::string& key, const Entry& e) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(e.value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, e.line, "expected a number, got '" + e.value + "'");
    }
    if (pos != e.value.size()) throw ConfigError(key, e.line, "expected a number, got '" + e.value + "'");
    return v;
}

std::int64_t parse_int(const std::string& key, const Entry& e) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(e.value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, e.line, "expected an integer, got '" + e.value + "'");
    }
    if (pos != e.value.size()) throw ConfigError(key, e.line, "expected an integer, got '" + e.value + "'");
    return v;
}

std::uint64_t parse_uint(const std::string& key, const Entry& e) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    if (!e.value.empty() && e.value[0] == '-') throw ConfigError(key, e.line, "expected a non-negative integer");
    try {
        v = std::stoull(e.value, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, e.line, "expected a non-negative integer, got '" + e.value + "'");
    }
    if (pos != e.value.size()) throw ConfigError(key, e.line, "expected a non-negative integer");
    return v;
}

bool parse_bool(const std::string& key, const Entry& e) {
    if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
    if (e.value == "false" || e.value == "0" || e.value == "no") return false;
    throw ConfigError(key, e.line, "expected true or false, got '" + e.value + "'");
}

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

int resolve_n(const std::string& key, const Entry& e, const std::string& text, int d) {
    try {
        return SampleSize{text}.resolve(d);
    } catch (const InvalidInput& ex) {
        throw ConfigError(key, e.line, ex.what());
    }
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.16e", v);
    return buf;
}

// Linear interpolation between order statistics.
double quantile(std::vector<double> sorted, double p) {
    std::sort(sorted.begin(), sorted.end());
    if (sorted.empty()) return std::nan("");
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

template <class Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (int k = 0; k < count; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int k = next++; k < count; k = next++) fn(k);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace

int SampleSize::resolve(int d) const {
    if (d < 1) throw InvalidInput("sample size: dimension must be >= 1");
    const std::int64_t dd = d;
    std::int64_t n = 0;
    if (text == "sqrt-d") n = ceil_sqrt(dd);
    else if (text == "d") n = dd;
    else if (text == "d^1.5") n = ceil_sqrt(dd * dd * dd);
    else if (text == "d^2") n = dd * dd;
    else if (text == "d^2.5") n = ceil_sqrt(dd * dd * dd * dd * dd);
    else if (text == "d^3") n = dd * dd * dd;
    else {
        std::size_t pos = 0;
        long long v = 0;
        try {
            v = std::stoll(text, &pos);
        } catch (const std::exception&) {
            throw InvalidInput("unknown sample size '" + text + "'");
        }
        if (pos != text.size()) throw InvalidInput("unknown sample size '" + text + "'");
        n = v;
    }
    if (n < 1 || n > 100000000) throw InvalidInput("sample size out of range: " + text);
    return static_cast<int>(n);
}

void ExperimentConfig::validate() const {
    if (dimension < 1) throw ConfigError("dimension", 0, "must be >= 1");
    if (A.rows() != dimension || A.cols() != dimension) throw ConfigError("objective", 0, "matrix is not d x d");
    if (m0.size() != dimension) throw ConfigError("m0", 0, "length differs from dimension");
    if (C0.rows() != dimension || C0.cols() != dimension) throw ConfigError("C0", 0, "matrix is not d x d");
    try {
        initial_params().validate();
    } catch (const std::exception& e) {
        throw ConfigError("C0", 0, e.what());
    }
    if (trials < 1) throw ConfigError("trials", 0, "must be >= 1");
    if (algorithm == Algorithm::cma_es && n < 4) throw ConfigError("n", 0, "cma-es needs n >= 4");
    if (algorithm == Algorithm::stoch_ngd && n < 2) throw ConfigError("n", 0, "stoch-ngd needs n >= 2");
    if (!(c_C > 0.0 && c_C <= 1.0)) throw ConfigError("c_C", 0, "must lie in (0, 1]");
    if (!(alpha_m > 0.0 && alpha_m <= 1.0)) throw ConfigError("alpha_m", 0, "must lie in (0, 1]");
    if (!(alpha_C > 0.0 && alpha_C <= 0.5)) throw ConfigError("alpha_C", 0, "must lie in (0, 1/2]");
    if (cma_eta_C && !(*cma_eta_C > 0.0 && *cma_eta_C < 1.0)) throw ConfigError("eta_C", 0, "must lie in (0, 1)");
    if (!(target_J >= 0.0)) throw ConfigError("target_J", 0, "must be >= 0");
    if (max_iters < 0) throw ConfigError("max_iters", 0, "must be >= 0");
    for (int v : n_grid)
        if (v < 2) throw ConfigError("n_grid", 0, "entries must be >= 2");
}

Matrix read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open matrix file " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &pos);
            } catch (const std::exception&) {
                throw InvalidInput("bad number '" + tok + "' in " + path.string());
            }
            if (pos != tok.size()) throw InvalidInput("bad number '" + tok + "' in " + path.string());
            row.push_back(v);
        }
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInput("empty matrix file " + path.string());
    const auto d = rows.size();
    Matrix M(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < d; ++i) {
        if (rows[i].size() != rows.front().size()) throw InvalidInput("ragged rows in " + path.string());
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return M;
}

Vector read_vector_file(const std::filesystem::path& path) {
    const Matrix M = read_matrix_file(path);
    if (M.cols() == 1) return M.col(0);
    if (M.rows() == 1) return M.row(0).transpose();
    throw InvalidInput("vector file " + path.string() + " has more than one row and column");
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    std::map<std::string, Entry> entries;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known_keys().count(key)) throw ConfigError(key, line_no, "unknown key");
        if (value.empty()) throw ConfigError(key, line_no, "empty value");
        if (entries.count(key)) throw ConfigError(key, line_no, "duplicate key");
        entries[key] = {value, line_no};
    }

    auto get = [&](const std::string& key) -> const Entry* {
        auto it = entries.find(key);
        return it == entries.end() ? nullptr : &it->second;
    };

    ExperimentConfig cfg;
    const Entry* algo = get("algorithm");
    if (!algo) throw ConfigError("algorithm", 0, "missing required key");
    if (algo->value == "det-ngd") cfg.algorithm = Algorithm::det_ngd;
    else if (algo->value == "stoch-ngd") cfg.algorithm = Algorithm::stoch_ngd;
    else if (algo->value == "cma-es") cfg.algorithm = Algorithm::cma_es;
    else throw ConfigError("algorithm", algo->line, "expected det-ngd, stoch-ngd or cma-es");

    const Entry* dim = get("dimension");
    if (!dim) throw ConfigError("dimension", 0, "missing required key");
    const auto d64 = parse_int("dimension", *dim);
    if (d64 < 1 || d64 > 100000) throw ConfigError("dimension", dim->line, "out of range");
    cfg.dimension = static_cast<int>(d64);
    const int d = cfg.dimension;

    if (const Entry* e = get("objective"); e && e->value != "ellipsoid") {
        if (e->value.rfind("file:", 0) != 0) throw ConfigError("objective", e->line, "expected ellipsoid or file:<path>");
        try {
            cfg.A = read_matrix_file(resolve_path(base_dir, e->value.substr(5)));
        } catch (const InvalidInput& ex) {
            throw ConfigError("objective", e->line, ex.what());
        }
        if (cfg.A.rows() != d || cfg.A.cols() != d) throw ConfigError("objective", e->line, "matrix is not d x d");
        cfg.objective_name = e->value;
    } else {
        if (d < 2) throw ConfigError("dimension", dim->line, "the ellipsoid needs d >= 2");
        cfg.A = build_ellipsoid(d).A();
    }
    try {
        QuadraticComposite check(cfg.A);
    } catch (const std::exception& ex) {
        throw ConfigError("objective", get("objective") ? get("objective")->line : 0, ex.what());
    }

    if (const Entry* e = get("transform")) {
        try {
            cfg.transform = MonotoneTransform::parse(e->value);
        } catch (const InvalidInput& ex) {
            throw ConfigError("transform", e->line, ex.what());
        }
    }

    if (const Entry* e = get("n")) cfg.n_spec.text = e->value;
    cfg.n = resolve_n("n", get("n") ? *get("n") : Entry{"d", 0}, cfg.n_spec.text, d);
    if (const Entry* e = get("n_grid")) {
        std::istringstream ss(e->value);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) throw ConfigError("n_grid", e->line, "empty entry");
            cfg.n_grid.push_back(resolve_n("n_grid", *e, tok, d));
        }
    }

    if (const Entry* e = get("c_C")) cfg.c_C = parse_double("c_C", *e);
    if (const Entry* e = get("alpha")) cfg.alpha_m = cfg.alpha_C = parse_double("alpha", *e);
    if (const Entry* e = get("alpha_m")) cfg.alpha_m = parse_double("alpha_m", *e);
    if (const Entry* e = get("alpha_C")) cfg.alpha_C = parse_double("alpha_C", *e);
    if (const Entry* e = get("eta_C")) cfg.cma_eta_C = parse_double("eta_C", *e);
    if (const Entry* e = get("vhat_exponent")) {
        if (e->value == "step6") cfg.vhat_exponent = VhatExponent::step6;
        else if (e->value == "mc-nu") cfg.vhat_exponent = VhatExponent::mc_nu;
        else throw ConfigError("vhat_exponent", e->line, "expected step6 or mc-nu");
    }

    cfg.m0 = Vector::Zero(d);
    if (const Entry* e = get("m0")) {
        if (e->value == "zeros") {
        } else if (e->value.rfind("constant:", 0) == 0) {
            cfg.m0.setConstant(parse_double("m0", Entry{e->value.substr(9), e->line}));
        } else if (e->value.rfind("file:", 0) == 0) {
            try {
                cfg.m0 = read_vector_file(resolve_path(base_dir, e->value.substr(5)));
            } catch (const InvalidInput& ex) {
                throw ConfigError("m0", e->line, ex.what());
            }
            if (cfg.m0.size() != d) throw ConfigError("m0", e->line, "length differs from dimension");
        } else {
            throw ConfigError("m0", e->line, "expected zeros, constant:<c> or file:<path>");
        }
    }
    cfg.C0 = Matrix::Identity(d, d);
    if (const Entry* e = get("C0")) {
        if (e->value == "identity") {
        } else if (e->value.rfind("file:", 0) == 0) {
            try {
                cfg.C0 = read_matrix_file(resolve_path(base_dir, e->value.substr(5)));
            } catch (const InvalidInput& ex) {
                throw ConfigError("C0", e->line, ex.what());
            }
            if (cfg.C0.rows() != d || cfg.C0.cols() != d) throw ConfigError("C0", e->line, "matrix is not d x d");
        } else {
            throw ConfigError("C0", e->line, "expected identity or file:<path>");
        }
    }

    if (const Entry* e = get("trials")) {
        const auto v = parse_int("trials", *e);
        if (v < 1 || v > 1000000) throw ConfigError("trials", e->line, "must be >= 1");
        cfg.trials = static_cast<int>(v);
    }
    if (const Entry* e = get("base_seed")) cfg.base_seed = parse_uint("base_seed", *e);
    if (const Entry* e = get("target_J")) cfg.target_J = parse_double("target_J", *e);
    if (const Entry* e = get("max_iters")) cfg.max_iters = parse_int("max_iters", *e);
    if (const Entry* e = get("emit_theory")) cfg.emit_theory = parse_bool("emit_theory", *e);
    if (const Entry* e = get("threads")) {
        const auto v = parse_int("threads", *e);
        if (v < 0 || v > 4096) throw ConfigError("threads", e->line, "out of range");
        cfg.threads = static_cast<int>(v);
    }

    // Re-raise validation failures with the offending line when known.
    try {
        cfg.validate();
    } catch (const ConfigError& ex) {
        const Entry* e = get(ex.key());
        if (e && ex.line() == 0) {
            const std::string what = ex.what();
            throw ConfigError(ex.key(), e->line, what.substr(what.find(": ") + 2));
        }
        throw;
    }
    return cfg;
}

ExperimentConfig resolve_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", 0, "cannot open " + path.string());
    return parse_config(in, path.parent_path());
}

RunResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
    const QuadraticComposite f(cfg.A, cfg.transform);
    const GaussianParams init = cfg.initial_params();
    switch (cfg.algorithm) {
        case Algorithm::det_ngd:
            return run_deterministic(cfg.A, init, DetSchedule{cfg.alpha_m, cfg.alpha_C}, cfg.stop_rule());
        case Algorithm::stoch_ngd: {
            RngStream rng(seed);
            StochSchedule sched;
            sched.c_C = cfg.c_C;
            sched.vhat_exponent = cfg.vhat_exponent;
            return run_stochastic(f, init, cfg.n, sched, rng, cfg.stop_rule(), cfg.A);
        }
        case Algorithm::cma_es: {
            RngStream rng(seed);
            CmaSchedule sched = CmaSchedule::standard(cfg.dimension, CmaWeights::intermediate(cfg.n));
            if (cfg.cma_eta_C) sched.eta_C = *cfg.cma_eta_C;
            return run_cma(f, init, cfg.n, sched, rng, cfg.stop_rule(), cfg.A);
        }
    }
    throw InternalError("run_trial: unknown algorithm");
}

std::vector<AggregateRow> aggregate(const std::vector<const std::vector<IterationTrace>*>& traces) {
    std::size_t longest = 0;
    for (const auto* tr : traces) longest = std::max(longest, tr->size());
    std::vector<AggregateRow> rows;
    rows.reserve(longest);
    for (std::size_t t = 0; t < longest; ++t) {
        AggregateRow row;
        row.iteration = static_cast<std::int64_t>(t);
        double sc = 0.0, sj = 0.0;
        for (const auto* tr : traces) {
            if (tr->size() <= t) continue;
            ++row.survivors;
            sc += (*tr)[t].cond;
            sj += (*tr)[t].J;
        }
        row.mean_cond = sc / row.survivors;
        row.mean_J = sj / row.survivors;
        double vc = 0.0, vj = 0.0;
        for (const auto* tr : traces) {
            if (tr->size() <= t) continue;
            vc += ((*tr)[t].cond - row.mean_cond) * ((*tr)[t].cond - row.mean_cond);
            vj += ((*tr)[t].J - row.mean_J) * ((*tr)[t].J - row.mean_J);
        }
        row.std_cond = std::sqrt(vc / row.survivors);
        row.std_J = std::sqrt(vj / row.survivors);
        rows.push_back(row);
    }
    return rows;
}

std::optional<double> theory_alpha(const ExperimentConfig& cfg) {
    switch (cfg.algorithm) {
        case Algorithm::det_ngd: return cfg.alpha_C;
        case Algorithm::stoch_ngd: return cfg.c_C / 2.0;
        case Algorithm::cma_es: return std::nullopt;
    }
    return std::nullopt;
}

BatchResult run_batch(const ExperimentConfig& cfg) {
    cfg.validate();
    BatchResult out;
    out.runs.resize(static_cast<std::size_t>(cfg.trials));
    std::vector<std::optional<TrialFailure>> failed(static_cast<std::size_t>(cfg.trials));

    parallel_for(cfg.trials, cfg.threads, [&](int k) {
        const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(k);
        try {
            out.runs[static_cast<std::size_t>(k)] = run_trial(cfg, seed);
        } catch (const NumericError& e) {
            failed[static_cast<std::size_t>(k)] = TrialFailure{k, seed, e.what()};
        } catch (const DomainError& e) {
            failed[static_cast<std::size_t>(k)] = TrialFailure{k, seed, e.what()};
        } catch (const InternalError& e) {
            failed[static_cast<std::size_t>(k)] = TrialFailure{k, seed, e.what()};
        }
    });

    std::vector<const std::vector<IterationTrace>*> traces;
    for (int k = 0; k < cfg.trials; ++k) {
        if (failed[static_cast<std::size_t>(k)]) {
            out.runs[static_cast<std::size_t>(k)] = RunResult{};
            out.failures.push_back(*failed[static_cast<std::size_t>(k)]);
        } else {
            traces.push_back(&out.runs[static_cast<std::size_t>(k)].trace);
        }
    }
    if (traces.empty()) throw BatchError("all " + std::to_string(cfg.trials) + " trials failed numerically");

    out.rows = aggregate(traces);
    if (cfg.emit_theory) {
        if (const auto alpha = theory_alpha(cfg)) {
            const auto seq = predict_cond_sequence(out.rows.front().mean_cond, *alpha,
                                                   static_cast<std::int64_t>(out.rows.size()) - 1);
            for (std::size_t t = 0; t < out.rows.size(); ++t) out.rows[t].theory_cond = seq[t];
        }
    }
    return out;
}

void write_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
    out << "iter,mean_cond,std_cond,mean_J,std_J,survivors,theory_cond\n";
    for (const auto& r : rows) {
        out << r.iteration << ',' << format_double(r.mean_cond) << ',' << format_double(r.std_cond) << ','
            << format_double(r.mean_J) << ',' << format_double(r.std_J) << ',' << r.survivors << ','
            << (r.theory_cond ? format_double(*r.theory_cond) : std::string()) << '\n';
    }
}

void emit_csv(const std::vector<AggregateRow>& rows, const std::filesystem::path& path) {
    if (rows.empty()) throw InvalidInput("emit_csv: no rows");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_csv(rows, out);
    out.flush();
    if (!out) throw std::runtime_error("write to " + path.string() + " failed");
}

std::vector<AggregateRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "iter,mean_cond,std_cond,mean_J,std_J,survivors,theory_cond")
        throw InvalidInput("read_csv: unexpected header");
    std::vector<AggregateRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() == 6 && line.back() == ',') f.emplace_back();
        if (f.size() != 7) throw InvalidInput("read_csv: expected 7 fields in '" + line + "'");
        AggregateRow r;
        r.iteration = std::stoll(f[0]);
        r.mean_cond = std::stod(f[1]);
        r.std_cond = std::stod(f[2]);
        r.mean_J = std::stod(f[3]);
        r.std_J = std::stod(f[4]);
        r.survivors = std::stoi(f[5]);
        if (!f[6].empty()) r.theory_cond = std::stod(f[6]);
        rows.push_back(r);
    }
    return rows;
}

double gradient_cosine(const NaturalGradient& estimate, const NaturalGradient& exact, bool* skipped_mean) {
    const bool skip = exact.delta_m.norm() == 0.0;
    if (skipped_mean) *skipped_mean = skip;
    Vector a, b;
    if (skip) {
        a = vect(estimate.delta_C);
        b = vect(exact.delta_C);
    } else {
        a = stack(estimate);
        b = stack(exact);
    }
    const double na = a.norm();
    const double nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

std::vector<ConsistencyRow> consistency_report(const QuadraticComposite& f, const GaussianParams& theta,
                                               const std::vector<int>& n_grid, int seeds, std::uint64_t base_seed,
                                               VhatExponent exponent) {
    theta.validate();
    if (seeds < 1) throw InvalidInput("consistency_report: seeds must be >= 1");
    const NaturalGradient exact = nat_grad_quadratic(theta, f.A());
    std::vector<ConsistencyRow> rows;
    for (int n : n_grid) {
        std::vector<double> cos(static_cast<std::size_t>(seeds));
        bool skipped = false;
        for (int k = 0; k < seeds; ++k) {
            RngStream rng(base_seed + static_cast<std::uint64_t>(k));
            SamplePopulation pop = sample_population(theta, n, rng, f);
            assign_weights(pop, exponent, true);
            cos[static_cast<std::size_t>(k)] = gradient_cosine(estimate_gradient(pop, theta), exact, &skipped);
        }
        ConsistencyRow r;
        r.n = n;
        r.seeds = seeds;
        r.mean_cos = std::accumulate(cos.begin(), cos.end(), 0.0) / seeds;
        double v = 0.0;
        for (double c : cos) v += (c - r.mean_cos) * (c - r.mean_cos);
        r.std_cos = std::sqrt(v / seeds);
        r.min_cos = *std::min_element(cos.begin(), cos.end());
        r.max_cos = *std::max_element(cos.begin(), cos.end());
        r.q05 = quantile(cos, 0.05);
        r.median = quantile(cos, 0.5);
        r.q95 = quantile(cos, 0.95);
        r.mean_component_skipped = skipped;
        rows.push_back(r);
    }
    return rows;
}

void write_consistency_csv(const std::vector<ConsistencyRow>& rows, std::ostream& out) {
    out << "n,seeds,mean_cos,std_cos,min_cos,q05_cos,median_cos,q95_cos,max_cos,mean_component_skipped\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.seeds << ',' << format_double(r.mean_cos) << ',' << format_double(r.std_cos) << ','
            << format_double(r.min_cos) << ',' << format_double(r.q05) << ',' << format_double(r.median) << ','
            << format_double(r.q95) << ',' << format_double(r.max_cos) << ',' << (r.mean_component_skipped ? 1 : 0)
            << '\n';
    }
}

void write_theory_csv(double cond0, double alpha, std::int64_t iters, std::ostream& out) {
    const auto seq = predict_cond_sequence(cond0, alpha, iters);
    out << "iter,theory_cond,geometric_bound\n";
    for (std::int64_t t = 0; t <= iters; ++t)
        out << t << ',' << format_double(seq[static_cast<std::size_t>(t)]) << ','
            << format_double(predict_cond_upper_bound(cond0, alpha, t)) << '\n';
}

}  // namespace ngd
