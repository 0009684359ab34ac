#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gmx/errors.hpp"
#include "gmx/experiment.hpp"
#include "gmx/oracle.hpp"

using namespace gmx;
namespace fs = std::filesystem;
using io::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_config(const TempDir& dir, const json& cfg, const std::string& name = "cfg.json") {
    const std::string path = dir.file(name);
    io::write_file(path, cfg.dump(2));
    return path;
}

json small_mean_config(const TempDir& dir, std::uint64_t seed) {
    json cfg;
    cfg["problem"] = "mean";
    cfg["n"] = 10;
    cfg["seed"] = seed;
    cfg["out"] = dir.file("run");
    cfg["population"] = {{"kind", "bernoulli"}, {"p", 0.5}};
    cfg["constraints"] = {{"preset", "mean-equality"}, {"mu", 0.3}};
    cfg["estimator"] = {{"family", "affine"}};
    cfg["solver"] = {{"algorithm", "gdmax"},
                     {"eta", 0.01},
                     {"iterations_round1", 400},
                     {"iterations_later", 100},
                     {"exact_risk", true}};
    cfg["grid"] = {{"generator", "structured-mean"},
                   {"initial_count", 200},
                   {"reweight_count", 50},
                   {"fresh_count", 80}};
    cfg["outer"] = {{"max_rounds", 2}, {"exact_risk", true}};
    cfg["evaluation"] = {{"replications", 500}};
    return cfg;
}

}  // namespace

TEST_CASE("zipf population and preset rescaling") {
    const auto pop = experiment::zipf_population(150, 1.0);
    CHECK(pop.category_count() == 150);
    const auto target = core::Functional::expected_new_categories(100, 200);
    const double truth = core::eval_functional(target, pop);
    CHECK(truth > 0.0);
    CHECK(truth < 150.0);

    const auto cs = experiment::preset_constraints("new-categories", "strong", truth, target);
    REQUIRE(cs.size() == 3);
    // Mean bounds scale with truth/48.02.
    CHECK(cs[0].bound == doctest::Approx(50.0 * truth / 48.02).epsilon(1e-12));
    CHECK(cs[1].bound == doctest::Approx(-45.0 * truth / 48.02).epsilon(1e-12));
    CHECK(cs[2].bound == doctest::Approx(-0.95).epsilon(1e-12));

    const auto tau =
        experiment::preset_pseudo_prior("new-categories", "strong", 48.02, target);
    REQUIRE(tau.components.size() == 2);
    CHECK(tau.components[0].mu == doctest::Approx(47.5).epsilon(1e-12));
    CHECK(tau.components[0].sigma == doctest::Approx(7.5 / 1.95996).epsilon(1e-12));
    CHECK(tau.components[0].weight == 30.0);
    CHECK(tau.components[1].weight == 10.0);

    CHECK_THROWS_AS(experiment::preset_constraints("mean", "strong", 1.0,
                                                   core::Functional::mean()),
                    ConfigError);
}

TEST_CASE("config validation: missing keys are named") {
    TempDir dir("gmx_test_cfg");
    json cfg;
    cfg["problem"] = "mean";
    const std::string path = write_config(dir, cfg);
    try {
        experiment::run_experiment(path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("\"n\"") != std::string::npos);
    }

    json bad = small_mean_config(dir, 1);
    bad["problem"] = "nonsense";
    CHECK_THROWS_AS(experiment::run_experiment(write_config(dir, bad, "bad.json")), ConfigError);

    json nc;
    nc["problem"] = "new-categories";
    nc["n"] = 100;
    const std::string nc_path = write_config(dir, nc, "nc.json");
    try {
        experiment::run_experiment(nc_path);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("\"m\"") != std::string::npos);
    }
}

TEST_CASE("mean experiment end to end: oracle match, artifacts, determinism") {
    TempDir dir("gmx_test_mean");
    const json cfg = small_mean_config(dir, 5);
    const std::string path = write_config(dir, cfg);
    const json summary = experiment::run_experiment(path);

    // Close to the closed form on a desk-scale grid.
    const auto coef = summary.at("coefficients").get<std::vector<double>>();
    const oracle::MeanProblemSpec spec{0.3, 10, 0.0, 1.0};
    const auto truth = oracle::gamma_minimax_affine(spec);
    CHECK(coef[0] == doctest::Approx(truth.b0).epsilon(0.2));
    CHECK(coef[1] == doctest::Approx(truth.b1).epsilon(0.1));
    CHECK(summary.at("r_sup_final").get<double>() ==
          doctest::Approx(oracle::minimax_bayes_risk(spec)).epsilon(0.05));

    // Artifacts exist and re-parse.
    CHECK(fs::exists(dir.file("run/rounds.jsonl")));
    CHECK(fs::exists(dir.file("run/final_checkpoint.json")));
    CHECK(fs::exists(dir.file("run/grid_summary.csv")));
    CHECK(fs::exists(dir.file("run/round_1_trace.csv")));
    const auto ck = io::checkpoint_from_json(io::read_json(dir.file("run/final_checkpoint.json")));
    CHECK(ck.beta == coef);
    {
        std::ifstream log(dir.file("run/rounds.jsonl"));
        std::string line;
        int rounds = 0;
        while (std::getline(log, line)) {
            if (line.empty()) continue;
            const json rep = json::parse(line);  // throws if malformed
            CHECK(rep.contains("r_sup_current"));
            ++rounds;
        }
        CHECK(rounds == summary.at("rounds").get<int>());
    }

    // Same seed, byte-identical summary (fresh output directory).
    TempDir dir2("gmx_test_mean2");
    json cfg2 = small_mean_config(dir2, 5);
    const json summary2 = experiment::run_experiment(write_config(dir2, cfg2));
    json a = summary, b = summary2;
    a.erase("final_checkpoint");  // paths differ between directories
    b.erase("final_checkpoint");
    CHECK(a.dump() == b.dump());

    // Different seed changes the grid and hence (slightly) the numbers.
    TempDir dir3("gmx_test_mean3");
    json cfg3 = small_mean_config(dir3, 6);
    const json summary3 = experiment::run_experiment(write_config(dir3, cfg3));
    CHECK(summary3.at("r_sup_final").get<double>() !=
          summary.at("r_sup_final").get<double>());
}

TEST_CASE("fictitious play through the experiment pipeline") {
    TempDir dir("gmx_test_fp");
    json cfg = small_mean_config(dir, 7);
    cfg["solver"] = {{"algorithm", "fictitious-play"},
                     {"iterations_round1", 800},
                     {"iterations_later", 200},
                     {"trace_cadence", 100}};
    cfg["outer"]["max_rounds"] = 1;
    const json summary = experiment::run_experiment(write_config(dir, cfg));
    const auto coef = summary.at("coefficients").get<std::vector<double>>();
    const auto truth = oracle::gamma_minimax_affine({0.3, 10, 0.0, 1.0});
    CHECK(coef[0] == doctest::Approx(truth.b0).epsilon(0.3));
    CHECK(coef[1] == doctest::Approx(truth.b1).epsilon(0.1));
    // The trace carries both bounds.
    const std::string trace = io::read_file(dir.file("run/round_1_trace.csv"));
    CHECK(trace.find("iteration,bayes_risk,lower,upper") == 0);
}

TEST_CASE("eval_estimator: values and raw counts") {
    TempDir dir("gmx_test_eval");
    // Affine (0,1): the sample mean.
    nets::EstimatorParams d = nets::initialize(nets::Architecture::affine_mean(), 1);
    io::write_file(dir.file("affine.json"), io::checkpoint_to_json(d).dump());
    io::write_file(dir.file("vals.json"), json{{"values", {0.2, 0.4}}}.dump());
    CHECK(experiment::eval_estimator(dir.file("affine.json"), dir.file("vals.json")) ==
          doctest::Approx(0.3).epsilon(1e-15));

    // SKN at init on raw counts equals the baseline combination.
    const auto skn = nets::initialize(
        nets::Architecture::skn(10, 20, {nets::BaselineKind::plugin_mm}, {1.0}), 2);
    io::write_file(dir.file("skn.json"), io::checkpoint_to_json(skn).dump());
    io::write_file(dir.file("counts.json"), json{{"counts", {5, 5}}, {"n", 10}}.dump());
    CHECK(experiment::eval_estimator(dir.file("skn.json"), dir.file("counts.json")) ==
          doctest::Approx(0.7431471805599453).epsilon(1e-12));
}

TEST_CASE("experiment resume continues from the last complete round") {
    TempDir dir("gmx_test_resume");
    json cfg = small_mean_config(dir, 9);
    cfg["outer"] = {{"max_rounds", 2}, {"exact_risk", true}, {"eps_abs", 0.0}, {"eps_rel", 0.0}};
    const std::string path = write_config(dir, cfg);
    const json full = experiment::run_experiment(path);
    REQUIRE(full.at("rounds").get<int>() == 2);

    // Re-run round 1 only, then resume to completion; the final summary
    // matches the uninterrupted run.
    TempDir dir2("gmx_test_resume2");
    json cfg_part = small_mean_config(dir2, 9);
    cfg_part["outer"] = {{"max_rounds", 1}, {"exact_risk", true}, {"eps_abs", 0.0},
                         {"eps_rel", 0.0}};
    // max_rounds=1 marks the round as "budget"; strip the stop flag so the
    // resume path accepts it as incomplete.
    experiment::run_experiment(write_config(dir2, cfg_part));
    {
        const std::string log_path = dir2.file("run/rounds.jsonl");
        std::ifstream in(log_path);
        std::string line;
        std::getline(in, line);
        json rep = json::parse(line);
        rep["stop"] = "";
        io::write_file(log_path, rep.dump() + "\n");
    }
    json cfg_resume = small_mean_config(dir2, 9);
    cfg_resume["outer"] = {{"max_rounds", 2}, {"exact_risk", true}, {"eps_abs", 0.0},
                           {"eps_rel", 0.0}};
    cfg_resume["resume"] = true;
    const json resumed = experiment::run_experiment(write_config(dir2, cfg_resume, "resume.json"));
    CHECK(resumed.at("r_sup_final").get<double>() ==
          doctest::Approx(full.at("r_sup_final").get<double>()).epsilon(1e-12));
    CHECK(resumed.at("coefficients") == full.at("coefficients"));
}
