#include "gmx/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"
#include "gmx/oracle.hpp"

namespace gmx::experiment {

namespace fs = std::filesystem;
using io::json;

namespace {

// Paper-scale preset intervals; rescaled by truth / paper_truth so they
// track whatever synthetic population a run uses.
struct PresetIntervals {
    double paper_truth;
    double mean_lo, mean_hi;
    double prob_lo, prob_hi;
};

PresetIntervals preset_intervals(const std::string& problem, const std::string& preset) {
    if (problem == "new-categories") {
        if (preset == "strong") return {48.02, 45, 50, 40, 55};
        if (preset == "weak") return {48.02, 40, 55, 30, 65};
        if (preset == "almost-none") return {48.02, 35, 60, 20, 75};
    } else if (problem == "entropy") {
        if (preset == "strong") return {4.57, 4.3, 4.7, 4.0, 5.0};
        if (preset == "weak") return {4.57, 4.0, 5.0, 3.5, 5.5};
        if (preset == "almost-none") return {4.57, 3.7, 5.3, 3.0, 6.0};
    }
    throw ConfigError("no preset '" + preset + "' for problem '" + problem + "'");
}

double require_number(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key))
        throw ConfigError("missing required key \"" + key + "\" in " + where);
    if (!j.at(key).is_number())
        throw ConfigError("key \"" + key + "\" in " + where + " must be a number");
    return j.at(key).get<double>();
}

}  // namespace

core::Distribution zipf_population(int categories, double exponent) {
    if (categories < 1) throw ConfigError("zipf population: categories must be >= 1");
    std::vector<double> p(static_cast<std::size_t>(categories));
    double total = 0.0;
    for (int k = 1; k <= categories; ++k) {
        p[static_cast<std::size_t>(k - 1)] = std::pow(static_cast<double>(k), -exponent);
        total += p[static_cast<std::size_t>(k - 1)];
    }
    for (double& x : p) x /= total;
    return core::Distribution::multinomial(std::move(p));
}

std::vector<core::MomentConstraint> preset_constraints(const std::string& problem,
                                                       const std::string& preset, double truth,
                                                       const core::Functional& phi) {
    const PresetIntervals iv = preset_intervals(problem, preset);
    const double scale = truth / iv.paper_truth;
    std::vector<core::MomentConstraint> out;
    out.push_back(core::MomentConstraint::upper(phi, iv.mean_hi * scale, "prior mean ub"));
    out.push_back(core::MomentConstraint::lower(phi, iv.mean_lo * scale, "prior mean lb"));
    out.push_back(core::MomentConstraint::lower(
        core::Functional::indicator(phi, iv.prob_lo * scale, iv.prob_hi * scale), 0.95,
        "prior probability of the 95% interval"));
    return out;
}

gridgen::PseudoPrior preset_pseudo_prior(const std::string& problem, const std::string& preset,
                                         double truth, const core::Functional& phi,
                                         double functional_weight, double k_weight,
                                         double nb_success, int nb_failures) {
    const PresetIntervals iv = preset_intervals(problem, preset);
    const double scale = truth / iv.paper_truth;
    gridgen::PseudoPrior tau;
    tau.components.push_back(gridgen::PseudoPriorComponent::normal_on(
        phi, 0.5 * (iv.mean_lo + iv.mean_hi) * scale, iv.prob_lo * scale, iv.prob_hi * scale,
        functional_weight));
    tau.components.push_back(
        gridgen::PseudoPriorComponent::negbinomial_on_k(nb_success, nb_failures, k_weight));
    return tau;
}

namespace {

core::Distribution population_from_json(const json& j) {
    const std::string kind = j.value("kind", "");
    if (kind == "zipf")
        return zipf_population(j.value("categories", 150), j.value("exponent", 1.0));
    if (kind == "bernoulli") return core::Distribution::bernoulli(j.value("p", 0.5));
    if (kind == "multinomial" || kind == "point_support")
        return io::distribution_from_json(j);
    throw ConfigError("population: unknown kind '" + kind + "'");
}

struct Parsed {
    std::string problem;
    int n = 0, m = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out;
    bool resume = false;

    core::Distribution population = core::Distribution::bernoulli(0.5);
    core::Functional target = core::Functional::mean();
    double truth = 0.0;
    std::vector<core::MomentConstraint> constraints;
    std::string preset = "explicit";
    double mu = 0.0;  // mean-equality preset

    nets::EstimatorParams d0;
    std::string algorithm = "sgdmax";
    solvers::SolverConfig solver_round1, solver_later;

    std::string grid_generator;
    gridgen::StructuredGridConfig structured;
    gridgen::McmcConfig mcmc_round1, mcmc_later;
    gridgen::PseudoPrior tau;

    outer::OuterConfig outer_cfg;
    int stop_replications = 2000;
    bool outer_exact = false;
    bool solver_exact = false;
    int eval_replications = 20000;
};

Parsed parse_config(const json& cfg, const Overrides& overrides) {
    Parsed p;
    if (!cfg.contains("problem"))
        throw ConfigError("missing required key \"problem\" in config");
    p.problem = cfg.at("problem").get<std::string>();
    if (p.problem != "mean" && p.problem != "entropy" && p.problem != "new-categories")
        throw ConfigError("problem must be mean, entropy or new-categories");
    p.n = static_cast<int>(require_number(cfg, "n", "config"));
    if (p.n < 1) throw ConfigError("key \"n\" must be >= 1");
    if (p.problem == "new-categories") {
        p.m = static_cast<int>(require_number(cfg, "m", "config"));
        if (p.m < 1) throw ConfigError("key \"m\" must be >= 1");
    }
    p.seed = overrides.seed.value_or(cfg.value("seed", std::uint64_t{1}));
    p.threads = overrides.threads.value_or(cfg.value("threads", 1));
    p.out = overrides.out.value_or(cfg.value("out", std::string{"run"}));
    p.resume = cfg.value("resume", false);

    // Population and target functional.
    if (cfg.contains("population")) {
        p.population = population_from_json(cfg.at("population"));
    } else if (p.problem != "mean") {
        throw ConfigError("missing required key \"population\" in config");
    }
    if (p.problem == "mean")
        p.target = core::Functional::mean();
    else if (p.problem == "entropy")
        p.target = core::Functional::shannon_entropy();
    else
        p.target = core::Functional::expected_new_categories(p.n, p.m);
    p.truth = core::eval_functional(p.target, p.population);

    // Constraints.
    const json cons = cfg.value("constraints", json::object());
    p.preset = cons.value("preset", p.problem == "mean" ? "mean-equality" : "explicit");
    if (p.preset == "mean-equality") {
        p.mu = require_number(cons, "mu", "constraints");
        auto [up, lo] = core::MomentConstraint::equality(core::Functional::mean(), p.mu);
        p.constraints = {up, lo};
    } else if (p.preset == "none") {
        // unconstrained simplex
    } else if (p.preset == "explicit") {
        for (const auto& c : cons.value("list", json::array()))
            p.constraints.push_back(io::constraint_from_json(c));
    } else {
        p.constraints = preset_constraints(p.problem, p.preset, p.truth, p.target);
    }

    // Estimator family.
    const json est = cfg.value("estimator", json::object());
    std::string family = est.value("family", p.problem == "mean" ? "affine" : "skn");
    const std::uint64_t init_seed = est.value("init_seed", std::uint64_t{7});
    if (family == "affine") {
        p.d0 = nets::initialize(nets::Architecture::affine_mean(), init_seed);
    } else if (family == "skn") {
        std::vector<nets::BaselineKind> baselines;
        std::vector<double> init_weights;
        if (est.contains("baselines")) {
            for (const auto& name : est.at("baselines"))
                baselines.push_back(nets::baseline_from_name(name.get<std::string>()));
            init_weights = est.value("init_weights", std::vector<double>{});
        } else if (p.problem == "new-categories") {
            baselines = {nets::BaselineKind::smoothed_gt_new_categories,
                         nets::BaselineKind::chao_new_categories};
            init_weights = {0.5, 0.5};
        } else if (p.problem == "entropy") {
            baselines = {nets::BaselineKind::plugin_mm};
            init_weights = {1.0};
        } else {
            throw ConfigError("skn on the mean problem needs explicit baselines");
        }
        p.d0 = nets::initialize(nets::Architecture::skn(p.n, p.m, std::move(baselines),
                                                        std::move(init_weights),
                                                        est.value("hidden", 50)),
                                init_seed);
    } else if (family == "deepset") {
        p.d0 = nets::initialize(nets::Architecture::deepset_skn(p.n, est.value("phi1", 10),
                                                                est.value("phi2", 5),
                                                                est.value("rho1", 10)),
                                init_seed);
    } else if (family == "elm") {
        const nets::ElmInput input = p.problem == "mean" ? nets::ElmInput::real_sample
                                                         : nets::ElmInput::fingerprint;
        p.d0 = nets::initialize(
            nets::Architecture::elm(input, est.value("input_dim", p.n), est.value("hidden", 50),
                                    est.value("frozen_seed", std::uint64_t{11}), p.n, p.m),
            init_seed);
    } else {
        throw ConfigError("unknown estimator family: " + family);
    }

    // Solver.
    const json sol = cfg.value("solver", json::object());
    p.algorithm = sol.value("algorithm", p.problem == "mean" ? "sgdmax" : "sgdmax");
    p.solver_exact = sol.value("exact_risk", false);
    solvers::SolverConfig base;
    base.eta = sol.value("eta", p.problem == "entropy" ? 0.001 : 0.005);
    base.batch_j = sol.value("J", p.problem == "mean" ? 50 : 30);
    base.batch_jprime = sol.value("Jprime", 50);
    base.trace_cadence = sol.value("trace_cadence", 50);
    base.exact_max_oracle = p.solver_exact;
    p.solver_round1 = base;
    p.solver_round1.iterations =
        sol.value("iterations_round1", p.problem == "new-categories" ? 4000
                                       : p.problem == "entropy"      ? 6000
                                                                     : 2000);
    p.solver_later = base;
    p.solver_later.iterations = sol.value("iterations_later", 200);
    p.solver_round1.trace_cadence = std::min(p.solver_round1.trace_cadence,
                                             p.solver_round1.iterations);
    p.solver_later.trace_cadence = std::min(p.solver_later.trace_cadence,
                                            p.solver_later.iterations);

    // Grid generation.
    const json grid = cfg.value("grid", json::object());
    p.grid_generator = grid.value("generator",
                                  p.problem == "mean" ? "structured-mean" : "mcmc");
    p.structured.initial_count = grid.value("initial_count", 2000);
    p.structured.reweight_count = grid.value("reweight_count", 500);
    p.structured.fresh_support = grid.value("fresh_support", 10);
    p.structured.fresh_count = grid.value("fresh_count", 1000);

    gridgen::McmcConfig mc;
    mc.iterations = grid.value("iterations_round1", 2000);
    const json mix = grid.value("proposal", json::object());
    mc.p_perturb = mix.value("perturb", 0.8);
    mc.p_birth = mix.value("birth", 0.1);
    mc.p_death = mix.value("death", 0.1);
    mc.dirichlet_alpha = grid.value("dirichlet_alpha", 200.0);
    mc.birth_mass = grid.value("birth_mass", 0.05);
    mc.start_categories = grid.value("start_categories", 146);
    p.mcmc_round1 = mc;
    p.mcmc_later = mc;
    p.mcmc_later.iterations = grid.value("iterations_later", 1000);
    // Per-state risk replications inside the MH target.
    p.mcmc_round1.seed = p.mcmc_later.seed = 0;  // derived per round at run time

    if (p.problem != "mean" && p.preset != "explicit" && p.preset != "none") {
        const json pp = grid.value("pseudo_prior", json::object());
        p.tau = preset_pseudo_prior(p.problem, p.preset, p.truth, p.target,
                                    pp.value("functional_weight", 30.0),
                                    pp.value("k_weight", 10.0), pp.value("nb_success", 0.995),
                                    pp.value("nb_failures", 2));
    }

    // Outer loop.
    const json out = cfg.value("outer", json::object());
    p.outer_cfg.max_rounds = out.value("max_rounds", 5);
    p.outer_cfg.eps_rel = out.value("eps_rel", 0.02);
    p.outer_cfg.eps_abs = out.value("eps_abs", 1e-4);
    p.outer_cfg.force_all_rounds = out.value("force_all_rounds", false);
    p.stop_replications = out.value("stop_replications", 2000);
    p.outer_exact = out.value("exact_risk", false);
    p.eval_replications = cfg.value("evaluation", json::object()).value("replications", 20000);
    return p;
}

int mcmc_risk_replications(const json& cfg) {
    return cfg.value("grid", json::object()).value("risk_replications", 200);
}

}  // namespace

double eval_estimator(const std::string& checkpoint_path, const std::string& data_path) {
    const nets::EstimatorParams d = io::checkpoint_from_json(io::read_json(checkpoint_path));
    const json data = io::read_json(data_path);
    core::Observation obs = core::Observation::real_sample({});
    if (data.contains("values")) {
        auto values = data.at("values").get<std::vector<double>>();
        double lo = 0.0, hi = 1.0;
        for (double v : values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        obs = core::Observation::real_sample(std::move(values), lo, hi);
    } else if (data.contains("counts")) {
        const auto counts = data.at("counts").get<std::vector<std::int64_t>>();
        std::int64_t total = 0;
        for (auto c : counts) total += c;
        const int n = data.value("n", static_cast<int>(total));
        obs = core::Observation::from_counts(counts, n);
    } else {
        throw ConfigError(data_path + ": expected \"values\" or \"counts\"");
    }
    return nets::forward(d, obs);
}

io::json run_experiment(const std::string& config_path, const Overrides& overrides) {
    const json cfg = io::read_json(config_path);
    Parsed p = parse_config(cfg, overrides);
    fs::create_directories(p.out);

    const auto out_path = [&](const std::string& name) { return (fs::path(p.out) / name).string(); };

    // Shared current-estimator state: the MCMC refinement targets the risk
    // of the estimator from the previous round (the warm start in round 1).
    auto current = std::make_shared<nets::EstimatorParams>(p.d0);
    const int mcmc_reps = mcmc_risk_replications(cfg);

    outer::Problem problem;
    problem.constraints = p.constraints;

    problem.extend_grid = [&, current](core::Grid& grid, int round) {
        if (p.grid_generator == "structured-mean") {
            gridgen::structured_mean_grid(grid, round, p.structured, p.seed);
            return;
        }
        gridgen::McmcConfig mc = round <= 1 ? p.mcmc_round1 : p.mcmc_later;
        mc.seed = rng::derive_seed(p.seed, static_cast<std::uint64_t>(rng::Stage::grid_gen),
                                   static_cast<std::uint64_t>(round));
        const auto risk_fn = gridgen::make_deterministic_mc_risk(
            nets::make_evaluator(*current), p.target, p.n, mcmc_reps, p.seed);
        gridgen::mcmc_refine(grid, round, risk_fn, p.tau, mc);
    };

    problem.solve_inner = [&, current](const nets::EstimatorParams& warm, const core::Grid& grid,
                                       int round) {
        const solvers::SolverConfig& scfg = round <= 1 ? p.solver_round1 : p.solver_later;
        const std::uint64_t solver_seed =
            rng::derive_seed(p.seed, static_cast<std::uint64_t>(rng::Stage::solver_max),
                             static_cast<std::uint64_t>(round), 0xfeed);
        nets::EstimatorParams result = warm;
        solvers::SolverTrace trace;
        if (p.algorithm == "exact-affine") {
            if (p.preset != "mean-equality")
                throw ConfigError("exact-affine solver needs the mean-equality preset");
            const auto exact = solvers::affine_minimax_exact(grid, p.mu, p.n);
            result.beta = {exact.b0, exact.b1};
        } else if (p.algorithm == "fictitious-play") {
            nets::MixtureEstimator mix0;
            mix0.members.emplace_back(warm, 1.0);
            const auto feasible = risk::max_bayes_risk_exact(
                risk::RiskTable{grid.id(), std::vector<double>(grid.size(), 0.0), true, {}}, grid,
                p.constraints);
            const int n = p.n;
            auto fp = solvers::fictitious_play(
                mix0, feasible.prior, grid, p.constraints, p.n, scfg.iterations,
                solvers::affine_exact_provider(),
                [n](const core::Grid& g, const std::vector<double>& prior) {
                    return solvers::affine_best_response(g, prior, n);
                },
                false, scfg.trace_cadence);
            result = nets::average_mixture(fp.mixture);
            trace = std::move(fp.trace);
        } else if (p.algorithm == "gdmax") {
            auto gd = solvers::gdmax(warm, grid, p.constraints, p.n, scfg,
                                     solvers::affine_exact_provider());
            result = std::move(gd.params);
            trace = std::move(gd.trace);
        } else if (p.algorithm == "sgdmax") {
            const solvers::ExactRiskProvider* exact =
                p.solver_exact ? &solvers::affine_exact_provider() : nullptr;
            auto sg = solvers::sgdmax(warm, grid, p.constraints, p.target, p.n, scfg, solver_seed,
                                      p.threads, exact);
            result = std::move(sg.params);
            trace = std::move(sg.trace);
        } else {
            throw ConfigError("unknown solver algorithm: " + p.algorithm);
        }
        io::write_file(out_path("round_" + std::to_string(round) + "_trace.csv"),
                       io::trace_csv(trace));
        *current = result;
        return result;
    };

    const std::uint64_t stop_seed =
        rng::derive_seed(p.seed, static_cast<std::uint64_t>(rng::Stage::evaluation), 0x570b);
    problem.r_sup = [&](const nets::EstimatorParams& d, const core::Grid& grid) {
        if (p.outer_exact) {
            risk::RiskTable table;
            table.grid_id = grid.id();
            table.exact = true;
            table.values.resize(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i)
                table.values[i] =
                    solvers::affine_exact_provider().risk(d, grid[i], p.n);
            return risk::max_bayes_risk_exact(table, grid, p.constraints);
        }
        return risk::two_stage_max_bayes_risk(nets::make_evaluator(d), p.target, grid,
                                              p.constraints, p.n, p.stop_replications,
                                              rng::RngSpec{stop_seed}, p.threads);
    };

    // Resume from the last completed round when asked to.
    core::Grid grid;
    nets::EstimatorParams d0 = p.d0;
    std::ofstream log;
    if (p.resume && fs::exists(out_path("rounds.jsonl"))) {
        std::ifstream in(out_path("rounds.jsonl"));
        std::string line, last;
        while (std::getline(in, line))
            if (!line.empty()) last = line;
        if (!last.empty()) {
            const json rep = json::parse(last);
            if (!rep.value("stop", std::string{}).empty())
                throw ConfigError("run in '" + p.out + "' already finished; nothing to resume");
            const int done = rep.at("round").get<int>();
            io::grid_from_json(io::read_json(out_path("round_" + std::to_string(done) +
                                                      "_grid.json")),
                               grid);
            d0 = io::checkpoint_from_json(rep.at("checkpoint").is_string()
                                              ? io::read_json(rep.at("checkpoint").get<std::string>())
                                              : rep.at("checkpoint"));
            *current = d0;
            p.outer_cfg.start_round = done + 1;
            log.open(out_path("rounds.jsonl"), std::ios::app);
        }
    }
    if (!log.is_open()) log.open(out_path("rounds.jsonl"), std::ios::trunc);

    const auto on_round = [&](const outer::RoundReport& report) {
        const std::string ck = out_path("round_" + std::to_string(report.round) +
                                        "_checkpoint.json");
        io::write_file(ck, io::checkpoint_to_json(report.estimator).dump(2) + "\n");
        io::write_file(out_path("round_" + std::to_string(report.round) + "_grid.json"),
                       io::grid_to_json(/*grid=*/grid).dump() + "\n");
        log << io::round_report_to_json(report, ck).dump() << "\n";
        log.flush();
    };

    const auto reports = outer::run(p.outer_cfg, problem, d0, grid, on_round);
    const outer::RoundReport& final_round = reports.back();

    // Grid summary with the registered target functional.
    io::write_file(out_path("grid_summary.csv"),
                   io::grid_summary_csv(grid, {{"phi", p.target}}));

    // Final evaluation at the designated true population.
    json summary;
    summary["problem"] = p.problem;
    summary["n"] = p.n;
    if (p.problem == "new-categories") summary["m"] = p.m;
    summary["seed"] = p.seed;
    summary["preset"] = p.preset;
    summary["truth"] = p.truth;
    summary["rounds"] = reports.size();
    summary["stop"] = final_round.stop;
    summary["grid_size"] = final_round.grid_size;
    summary["r_sup_final"] = final_round.r_sup_current;
    summary["r_sup_next"] = final_round.r_sup_next;
    summary["kernels_backend"] = kernels::backend_name();

    const nets::EstimatorParams& d_final = final_round.estimator;
    if (d_final.arch.family() == nets::Architecture::Family::affine_mean)
        summary["coefficients"] = d_final.beta;

    json lf = json::array();
    const auto& lf_prior = final_round.least_favorable.weights;
    for (std::size_t i = 0; i < lf_prior.size(); ++i)
        if (lf_prior[i] > 0.0) lf.push_back(json{{"index", i}, {"weight", lf_prior[i]}});
    summary["least_favorable_prior"] = std::move(lf);

    const rng::RngSpec eval_rng{rng::derive_seed(
        p.seed, static_cast<std::uint64_t>(rng::Stage::evaluation), 0xe7a1)};
    const bool population_matches =
        (p.problem == "mean") == p.population.is_point_support();
    if (population_matches) {
        summary["risk_at_truth"] = risk::mc_risk(nets::make_evaluator(d_final), p.target,
                                                 p.population, p.n, p.eval_replications, eval_rng)
                                       .value;
        if (d_final.arch.family() == nets::Architecture::Family::skn) {
            // Baseline risks at the truth, for the paper-style comparison.
            json base = json::object();
            for (const auto kind : d_final.arch.baselines()) {
                const int n = p.n, m = p.m;
                base[nets::baseline_name(kind)] =
                    risk::mc_risk([kind, n, m](const core::Observation& x) {
                                      return nets::baseline(kind, x, n, m);
                                  },
                                  p.target, p.population, p.n, p.eval_replications, eval_rng)
                        .value;
            }
            summary["baseline_risk_at_truth"] = std::move(base);
            summary["baseline_note"] =
                "plug-in baselines substitute for the published OSW/SCL/JVHW estimators";
        }
    }

    const std::string final_ck = out_path("final_checkpoint.json");
    io::write_file(final_ck, io::checkpoint_to_json(d_final).dump(2) + "\n");
    summary["final_checkpoint"] = final_ck;
    io::write_file(out_path("summary.json"), summary.dump(2) + "\n");
    return summary;
}

}  // namespace gmx::experiment
