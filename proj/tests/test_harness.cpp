#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "ngd/cma_es.hpp"
#include "ngd/errors.hpp"
#include "ngd/harness.hpp"

using namespace ngd;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text, const fs::path& base = {}) {
    std::istringstream in(text);
    return parse_config(in, base);
}

// Fresh scratch directory per test case.
struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("ngd_harness_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string csv_of(const std::vector<AggregateRow>& rows) {
    std::ostringstream out;
    write_csv(rows, out);
    return out.str();
}

void check_config_error(const std::string& text, const std::string& key, int line) {
    try {
        parse(text);
        FAIL("expected a ConfigError for key " << key);
    } catch (const ConfigError& e) {
        CHECK(e.key() == key);
        CHECK(e.line() == line);
    }
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + NGD_CLI_PATH + "\" " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* small_stoch =
    "algorithm = stoch-ngd\n"
    "dimension = 4\n"
    "n = d^2\n"
    "c_C = 0.5\n"
    "trials = 4\n"
    "base_seed = 17\n"
    "max_iters = 3000\n";

}  // namespace

TEST_CASE("SampleSize resolution") {
    const std::pair<const char*, int> d20[] = {{"sqrt-d", 5},  {"d", 20},      {"d^1.5", 90},
                                               {"d^2", 400},   {"d^2.5", 1789}, {"d^3", 8000}};
    for (const auto& [text, n] : d20) CHECK(SampleSize{text}.resolve(20) == n);
    CHECK(SampleSize{"sqrt-d"}.resolve(16) == 4);
    CHECK(SampleSize{"sqrt-d"}.resolve(17) == 5);
    CHECK(SampleSize{"d^1.5"}.resolve(4) == 8);
    CHECK(SampleSize{"d^2.5"}.resolve(4) == 32);
    CHECK(SampleSize{"d^2.5"}.resolve(10) == 317);
    CHECK(SampleSize{"37"}.resolve(20) == 37);
    CHECK_THROWS_AS(SampleSize{"d^4"}.resolve(20), InvalidInput);
    CHECK_THROWS_AS(SampleSize{"-3"}.resolve(20), InvalidInput);
}

TEST_CASE("parse_config: defaults") {
    const auto cfg = parse("algorithm = stoch-ngd\ndimension = 20\n");
    CHECK(cfg.algorithm == Algorithm::stoch_ngd);
    CHECK(cfg.trials == 50);
    CHECK(cfg.n == 20);
    CHECK(cfg.target_J == 1e-10);
    CHECK(cfg.m0 == Vector::Zero(20));
    CHECK(cfg.C0 == Matrix::Identity(20, 20));
    CHECK(cfg.A == build_ellipsoid(20).A());
    CHECK_FALSE(cfg.emit_theory);
    CHECK(cfg.transform.kind() == MonotoneTransform::Kind::identity);
    CHECK(cfg.vhat_exponent == VhatExponent::mc_nu);
}

TEST_CASE("parse_config: keys") {
    const auto cfg = parse(
        "# comment\n"
        "algorithm = cma-es\n"
        "dimension = 20   # trailing comment\n"
        "n = d^2.5\n"
        "transform = power:0.25\n"
        "eta_C = 0.3\n"
        "m0 = constant:10\n"
        "trials = 7\n"
        "base_seed = 18446744073709551615\n"
        "target_J = 1e-8\n"
        "max_iters = 12\n"
        "emit_theory = true\n"
        "threads = 2\n");
    CHECK(cfg.algorithm == Algorithm::cma_es);
    CHECK(cfg.n == 1789);
    CHECK(cfg.transform.kind() == MonotoneTransform::Kind::power);
    CHECK(*cfg.cma_eta_C == 0.3);
    CHECK(cfg.m0 == Vector::Constant(20, 10.0));
    CHECK(cfg.trials == 7);
    CHECK(cfg.base_seed == 18446744073709551615ull);
    CHECK(cfg.target_J == 1e-8);
    CHECK(cfg.max_iters == 12);
    CHECK(cfg.emit_theory);
    CHECK(cfg.threads == 2);

    const auto s = parse("algorithm = stoch-ngd\ndimension = 20\nn = sqrt-d\nalpha = 0.2\nvhat_exponent = step6\n"
                         "n_grid = 100, 1000,10000\n");
    CHECK(s.n == 5);
    CHECK(s.alpha_m == 0.2);
    CHECK(s.alpha_C == 0.2);
    CHECK(s.vhat_exponent == VhatExponent::step6);
    CHECK(s.n_grid == std::vector<int>{100, 1000, 10000});
}

TEST_CASE("parse_config: errors name the key and line") {
    check_config_error("algorithm = stoch-ngd\ndimension = 20\nfoo = 1\n", "foo", 3);
    check_config_error("algorithm = stoch-ngd\ndimension = 20\nc_C = 0.1\nc_C = 0.2\n", "c_C", 4);
    check_config_error("algorithm = stoch-ngd\ndimension = 20\nc_C = abc\n", "c_C", 3);
    check_config_error("algorithm = stoch-ngd\ndimension = 20\n\nc_C = 1.5\n", "c_C", 4);
    check_config_error("algorithm = simplex\ndimension = 20\n", "algorithm", 1);
    check_config_error("dimension = 20\n", "algorithm", 0);
    check_config_error("algorithm = cma-es\ndimension = 20\nn = 3\n", "n", 3);
    check_config_error("algorithm = stoch-ngd\ndimension = 20\nn = d^7\n", "n", 3);
    check_config_error("algorithm = det-ngd\ndimension = 20\nalpha_C = 0.6\n", "alpha_C", 3);
    check_config_error("algorithm = det-ngd\ndimension = 3\nobjective = file:/nonexistent/A.txt\n", "objective", 3);
    check_config_error("algorithm = det-ngd\ndimension = 3\ntrials = 0\n", "trials", 3);
    check_config_error("algorithm = det-ngd\ndimension = 3\nemit_theory = maybe\n", "emit_theory", 3);
    check_config_error("algorithm = det-ngd\ndimension = 3\nm0 = ones\n", "m0", 3);
    check_config_error("algorithm = det-ngd\ndimension = 3\njust a line\n", "", 3);
    CHECK_THROWS_AS(resolve_config("/nonexistent/config.txt"), ConfigError);
}

TEST_CASE("resolve_config: matrix files relative to the config") {
    TempDir dir;
    dir.write("A.txt", "1 0\n0 4\n");
    dir.write("C0.txt", "2 0.5\n0.5 1\n");
    dir.write("m0.txt", "1 1\n");
    const auto path = dir.write("cfg.txt",
                                "algorithm = stoch-ngd\ndimension = 2\nobjective = file:A.txt\nC0 = file:C0.txt\n"
                                "m0 = file:m0.txt\n");
    const auto cfg = resolve_config(path);
    CHECK(cfg.A(1, 1) == 4.0);
    CHECK(cfg.C0(0, 1) == 0.5);
    CHECK(cfg.m0 == Vector::Ones(2));

    dir.write("bad.txt", "1 2\n3 4\n");
    const auto bad = dir.write("cfg2.txt", "algorithm = det-ngd\ndimension = 2\nobjective = file:bad.txt\n");
    CHECK_THROWS_AS(resolve_config(bad), ConfigError);
    dir.write("notpd.txt", "1 0\n0 -1\n");
    const auto notpd = dir.write("cfg3.txt", "algorithm = det-ngd\ndimension = 2\nC0 = file:notpd.txt\n");
    CHECK_THROWS_AS(resolve_config(notpd), ConfigError);
}

TEST_CASE("run_batch: a single deterministic trial aggregates to itself") {
    const auto cfg = parse("algorithm = det-ngd\ndimension = 5\nalpha = 0.25\ntrials = 1\n");
    const auto batch = run_batch(cfg);
    REQUIRE(batch.runs.size() == 1);
    const auto& trace = batch.runs[0].trace;
    REQUIRE(batch.rows.size() == trace.size());
    for (std::size_t t = 0; t < trace.size(); ++t) {
        CHECK(batch.rows[t].mean_cond == trace[t].cond);
        CHECK(batch.rows[t].mean_J == trace[t].J);
        CHECK(batch.rows[t].std_cond == 0.0);
        CHECK(batch.rows[t].std_J == 0.0);
        CHECK(batch.rows[t].survivors == 1);
        CHECK_FALSE(batch.rows[t].theory_cond);
    }
    CHECK(batch.rows.back().mean_J <= 1e-10);
    CHECK(batch.rows[batch.rows.size() - 2].mean_J > 1e-10);
}

TEST_CASE("run_batch: deterministic theory column matches the mean Cond") {
    auto cfg = parse("algorithm = det-ngd\ndimension = 10\nalpha_m = 0.5\nalpha_C = 0.1\ntrials = 2\n"
                     "emit_theory = true\n");
    const auto batch = run_batch(cfg);
    for (const auto& r : batch.rows) {
        REQUIRE(r.theory_cond);
        CHECK(*r.theory_cond == doctest::Approx(r.mean_cond).epsilon(1e-9));
    }
    cfg.algorithm = Algorithm::cma_es;
    cfg.n = 40;
    cfg.max_iters = 5;
    for (const auto& r : run_batch(cfg).rows) CHECK_FALSE(r.theory_cond);
}

TEST_CASE("run_batch: determinism, thread independence and the cut rule") {
    auto cfg = parse(small_stoch);
    const auto a = run_batch(cfg);
    const auto b = run_batch(cfg);
    CHECK(csv_of(a.rows) == csv_of(b.rows));
    cfg.threads = 1;
    const auto serial = run_batch(cfg);
    cfg.threads = 3;
    const auto parallel = run_batch(cfg);
    CHECK(csv_of(serial.rows) == csv_of(a.rows));
    CHECK(csv_of(parallel.rows) == csv_of(a.rows));

    // Trial k is seed base_seed + k.
    const auto single = run_trial(cfg, 17 + 2);
    REQUIRE(single.trace.size() == a.runs[2].trace.size());
    CHECK(single.final_params.covariance == a.runs[2].final_params.covariance);

    CHECK(a.failures.empty());
    for (std::size_t t = 1; t < a.rows.size(); ++t) CHECK(a.rows[t].survivors <= a.rows[t - 1].survivors);
    for (const auto& run : a.runs) {
        CHECK(run.reached_target);
        for (std::size_t t = 0; t + 1 < run.trace.size(); ++t) CHECK(run.trace[t].J > cfg.target_J);
        CHECK(run.trace.back().J <= cfg.target_J);
    }
    CHECK(a.rows.front().survivors == 4);

    cfg.base_seed = 18;
    CHECK(csv_of(run_batch(cfg).rows) != csv_of(a.rows));
}

TEST_CASE("aggregate: survivors, population std") {
    std::vector<IterationTrace> t1(3), t2(1);
    for (int i = 0; i < 3; ++i) {
        t1[i].iteration = i;
        t1[i].cond = 1.0 + i;
        t1[i].J = 10.0 - i;
    }
    t2[0].cond = 3.0;
    t2[0].J = 4.0;
    const auto rows = aggregate({&t1, &t2});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].survivors == 2);
    CHECK(rows[0].mean_cond == 2.0);
    CHECK(rows[0].std_cond == 1.0);
    CHECK(rows[0].mean_J == 7.0);
    CHECK(rows[0].std_J == 3.0);
    CHECK(rows[1].survivors == 1);
    CHECK(rows[2].mean_cond == 3.0);
    CHECK(rows[2].std_J == 0.0);
}

TEST_CASE("CSV output and round trip") {
    AggregateRow r;
    r.iteration = 0;
    r.mean_cond = 1e6;
    r.std_cond = 0.0;
    r.mean_J = 1935331.9441744157;
    r.std_J = 1.0 / 3.0;
    r.survivors = 50;
    const std::string one = csv_of({r});
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);
    CHECK(one.rfind("iter,mean_cond,std_cond,mean_J,std_J,survivors,theory_cond\n", 0) == 0);
    CHECK(one.back() == '\n');
    CHECK(one[one.size() - 2] == ',');

    const auto batch = run_batch(parse(std::string(small_stoch) + "emit_theory = true\n"));
    const std::string text = csv_of(batch.rows);
    std::istringstream in(text);
    const auto back = read_csv(in);
    REQUIRE(back.size() == batch.rows.size());
    for (std::size_t t = 0; t < back.size(); ++t) {
        CHECK(back[t].mean_cond == batch.rows[t].mean_cond);
        CHECK(back[t].std_J == batch.rows[t].std_J);
        CHECK(back[t].survivors == batch.rows[t].survivors);
        CHECK(back[t].theory_cond == batch.rows[t].theory_cond);
    }
    CHECK(csv_of(back) == text);

    TempDir dir;
    emit_csv(batch.rows, dir.path / "out.csv");
    CHECK(slurp(dir.path / "out.csv") == text);
    CHECK_THROWS(emit_csv(batch.rows, dir.path / "missing" / "out.csv"));
    CHECK_THROWS_AS(emit_csv({}, dir.path / "empty.csv"), InvalidInput);

    std::istringstream junk("iter,foo\n");
    CHECK_THROWS_AS(read_csv(junk), InvalidInput);
}

TEST_CASE("gradient_cosine") {
    NaturalGradient a{Vector::Unit(2, 0), Matrix::Identity(2, 2)};
    CHECK(gradient_cosine(a, a) == doctest::Approx(1.0));
    NaturalGradient b{-Vector::Unit(2, 0), -Matrix::Identity(2, 2)};
    CHECK(gradient_cosine(a, b) == doctest::Approx(-1.0));

    bool skipped = false;
    NaturalGradient exact{Vector::Zero(2), Matrix::Identity(2, 2)};
    NaturalGradient est{Vector::Constant(2, 100.0), 3.0 * Matrix::Identity(2, 2)};
    CHECK(gradient_cosine(est, exact, &skipped) == doctest::Approx(1.0));
    CHECK(skipped);
    gradient_cosine(a, a, &skipped);
    CHECK_FALSE(skipped);
}

TEST_CASE("consistency_report") {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 1;
    A(1, 1) = 4;
    const QuadraticComposite f(A);
    const GaussianParams theta{Vector::Ones(2), Matrix::Identity(2, 2)};
    const auto rows = consistency_report(f, theta, {100, 1000, 10000}, 40, 5);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].seeds == 40);
        CHECK_FALSE(rows[i].mean_component_skipped);
        CHECK(rows[i].min_cos <= rows[i].q05);
        CHECK(rows[i].q05 <= rows[i].median);
        CHECK(rows[i].median <= rows[i].q95);
        CHECK(rows[i].q95 <= rows[i].max_cos);
        CHECK(rows[i].max_cos <= 1.0 + 1e-12);
        if (i > 0) CHECK(rows[i].mean_cos > rows[i - 1].mean_cos);
    }
    // Degenerate state: the mean sits at the optimum.
    const auto deg = consistency_report(QuadraticComposite(Matrix::Identity(2, 2)),
                                        {Vector::Zero(2), Matrix::Identity(2, 2)}, {1000}, 10, 1);
    CHECK(deg[0].mean_component_skipped);
    CHECK(deg[0].mean_cos > 0.5);

    std::ostringstream out;
    write_consistency_csv(rows, out);
    const std::string text = out.str();
    CHECK(text.rfind("n,seeds,mean_cos,", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

TEST_CASE("write_theory_csv") {
    std::ostringstream out;
    write_theory_csv(1e6, 0.1, 50, out);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "iter,theory_cond,geometric_bound");
    int rows = 0;
    std::string last;
    while (std::getline(in, line)) {
        ++rows;
        last = line;
    }
    CHECK(rows == 51);
    const auto c1 = last.find(',');
    const auto c2 = last.find(',', c1 + 1);
    CHECK(std::stod(last.substr(c2 + 1)) == doctest::Approx(2770.3219204265797).epsilon(1e-12));
    CHECK(std::stod(last.substr(c1 + 1, c2 - c1 - 1)) == doctest::Approx(predict_cond_recurrence(1e6, 0.1, 50)));
}

TEST_CASE("command-line interface") {
    TempDir dir;
    const auto cfg = dir.write("run.cfg", small_stoch);
    const auto out = dir.path / "run.csv";
    REQUIRE(run_cli("run --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"") == 0);
    const std::string text = slurp(out);
    CHECK(text == csv_of(run_batch(resolve_config(cfg)).rows));

    const auto theory = dir.path / "theory.csv";
    CHECK(run_cli("theory --cond0 1e6 --alpha 0.05 --iters 10 --out \"" + theory.string() + "\"") == 0);
    std::ostringstream expect;
    write_theory_csv(1e6, 0.05, 10, expect);
    CHECK(slurp(theory) == expect.str());

    dir.write("A.txt", "1 0\n0 4\n");
    const auto ccfg = dir.write("cons.cfg",
                                "algorithm = stoch-ngd\ndimension = 2\nobjective = file:A.txt\nm0 = constant:1\n"
                                "n_grid = 100,1000\ntrials = 5\n");
    const auto cons = dir.path / "cons.csv";
    CHECK(run_cli("consistency --config \"" + ccfg.string() + "\" --out \"" + cons.string() + "\"") == 0);
    const std::string report = slurp(cons);
    CHECK(std::count(report.begin(), report.end(), '\n') == 3);

    const auto bad = dir.write("bad.cfg", "algorithm = stoch-ngd\ndimension = 4\nbogus = 1\n");
    CHECK(run_cli("run --config \"" + bad.string() + "\" --out \"" + (dir.path / "x.csv").string() + "\"") == 2);
    CHECK(run_cli("theory --cond0 10 --alpha 0.9 --iters 3 --out \"" + (dir.path / "t.csv").string() + "\"") == 1);
    CHECK(run_cli("frobnicate") != 0);
    CHECK(run_cli("run --config \"" + cfg.string() + "\" --out /nonexistent/dir/out.csv") == 1);
}

TEST_CASE("shipped presets parse") {
    int count = 0;
    for (const auto& entry : fs::directory_iterator(NGD_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") continue;
        ++count;
        CAPTURE(entry.path().string());
        const auto cfg = resolve_config(entry.path());
        CHECK(cfg.trials >= 1);
        if (cfg.algorithm == Algorithm::cma_es) {
            const double eta = CmaSchedule::standard(cfg.dimension, CmaWeights::intermediate(cfg.n)).eta_C;
            CHECK(eta < 1.0);
        }
    }
    CHECK(count >= 10);
    const auto pair = resolve_config(fs::path(NGD_CONFIG_DIR) / "cma_ellipsoid_n-dp2.cfg");
    CHECK(CmaSchedule::standard(pair.dimension, CmaWeights::intermediate(pair.n)).eta_C ==
          doctest::Approx(199.0 / 584.0).epsilon(1e-14));
}
