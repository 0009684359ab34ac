#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gmx/errors.hpp"
#include "gmx/experiment.hpp"
#include "gmx/io.hpp"
#include "gmx/oracle.hpp"

namespace {

using gmx::io::json;

int cmd_run(const std::string& config, const gmx::experiment::Overrides& overrides) {
    const json summary = gmx::experiment::run_experiment(config, overrides);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_lp_solve(const std::string& path) {
    const gmx::lp::LpProblem problem = gmx::io::lp_problem_from_json(gmx::io::read_json(path));
    const gmx::lp::LpSolution sol = gmx::lp::solve_least_favorable(problem);
    json out;
    out["value"] = sol.value;
    out["weights"] = sol.weights;
    out["active_rows"] = sol.active_rows;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_oracle(double mu, int n) {
    const gmx::oracle::MeanProblemSpec spec{mu, n, 0.0, 1.0};
    const auto coef = gmx::oracle::gamma_minimax_affine(spec);
    const auto bound = gmx::oracle::max_variance_bound(0.0, 1.0, mu);
    json out;
    out["b0"] = coef.b0;
    out["b1"] = coef.b1;
    out["minimax_bayes_risk"] = gmx::oracle::minimax_bayes_risk(spec);
    out["max_variance"] = bound.bound;
    out["extremal"] = gmx::io::distribution_to_json(bound.extremal);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data) {
    std::cout << gmx::experiment::eval_estimator(checkpoint, data) << "\n";
    return 0;
}

int cmd_grid_gen(const std::string& out, int rounds, std::uint64_t seed, int initial_count,
                 int reweight_count, int fresh_count) {
    gmx::core::Grid grid;
    gmx::gridgen::StructuredGridConfig cfg;
    cfg.initial_count = initial_count;
    cfg.reweight_count = reweight_count;
    cfg.fresh_count = fresh_count;
    for (int round = 1; round <= rounds; ++round)
        gmx::gridgen::structured_mean_grid(grid, round, cfg, seed);
    gmx::io::write_file(out, gmx::io::grid_to_json(grid).dump() + "\n");
    gmx::io::write_file(out + ".csv",
                        gmx::io::grid_summary_csv(grid, {{"mean", gmx::core::Functional::mean()}}));
    std::cout << "grid with " << grid.size() << " points -> " << out << "\n";
    return 0;
}

int cmd_grid_inspect(const std::string& path) {
    gmx::core::Grid grid;
    gmx::io::grid_from_json(gmx::io::read_json(path), grid);
    std::map<int, std::size_t> per_round;
    for (std::size_t i = 0; i < grid.size(); ++i) ++per_round[grid.round_of(i)];
    json out;
    out["points"] = grid.size();
    json rounds = json::object();
    for (const auto& [round, count] : per_round) rounds[std::to_string(round)] = count;
    out["per_round"] = std::move(rounds);
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gamma-minimax estimator construction"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    app.add_option("--seed", seed, "master seed override");
    app.add_option("--threads", threads, "risk evaluation worker count");
    app.add_option("--out", out_dir, "output directory override");

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
    run->add_option("config", config_path, "config file")->required();

    auto* grid = app.add_subcommand("grid", "grid tooling");
    grid->require_subcommand(1);
    std::string grid_out = "grid.json", grid_in;
    int grid_rounds = 1, grid_initial = 2000, grid_reweight = 500, grid_fresh = 1000;
    std::uint64_t grid_seed = 1;
    auto* gen = grid->add_subcommand("gen", "generate a structured mean-problem grid");
    gen->add_option("--out", grid_out, "output JSON path");
    gen->add_option("--rounds", grid_rounds, "refinement rounds to apply");
    gen->add_option("--seed", grid_seed, "generator seed");
    gen->add_option("--initial-count", grid_initial, "round-1 two-point laws");
    gen->add_option("--reweight-count", grid_reweight, "per-round reweightings");
    gen->add_option("--fresh-count", grid_fresh, "per-round fresh-support laws");
    auto* inspect = grid->add_subcommand("inspect", "summarize a grid JSON file");
    inspect->add_option("grid", grid_in, "grid JSON path")->required();

    std::string lp_path;
    auto* lp = app.add_subcommand("lp-solve", "solve a least-favorable-prior LP from JSON");
    lp->add_option("problem", lp_path, "LpProblem JSON path")->required();

    double oracle_mu = 0.3;
    int oracle_n = 10;
    auto* orc = app.add_subcommand("oracle", "closed forms for the mean problem");
    orc->add_option("mu", oracle_mu, "prior mean constraint")->required();
    orc->add_option("n", oracle_n, "sample size")->required();

    std::string ck_path, data_path;
    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint on a data file");
    ev->add_option("checkpoint", ck_path, "checkpoint JSON")->required();
    ev->add_option("data", data_path, "data JSON ({\"values\":[..]} or {\"counts\":[..]})")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, {seed, threads, out_dir});
        if (*lp) return cmd_lp_solve(lp_path);
        if (*orc) return cmd_oracle(oracle_mu, oracle_n);
        if (*ev) return cmd_eval(ck_path, data_path);
        if (*grid) {
            if (*gen) return cmd_grid_gen(grid_out, grid_rounds, grid_seed, grid_initial,
                                          grid_reweight, grid_fresh);
            if (*inspect) return cmd_grid_inspect(grid_in);
        }
    } catch (const gmx::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const gmx::Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
