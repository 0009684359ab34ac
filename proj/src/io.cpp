#include "gmx/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "gmx/errors.hpp"

namespace gmx::io {

namespace {

// Shortest representation that round-trips.
std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

json distribution_to_json(const core::Distribution& p) {
    json j;
    if (p.is_point_support()) {
        j["kind"] = "point_support";
        j["support"] = p.points();
        j["weights"] = p.weights();
        j["a"] = p.lower();
        j["b"] = p.upper();
    } else {
        j["kind"] = "multinomial";
        j["probs"] = p.probs();
    }
    return j;
}

core::Distribution distribution_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "point_support") {
        return core::Distribution::point_support(
            j.at("support").get<std::vector<double>>(), j.at("weights").get<std::vector<double>>(),
            j.value("a", 0.0), j.value("b", 1.0));
    }
    if (kind == "multinomial")
        return core::Distribution::multinomial(j.at("probs").get<std::vector<double>>());
    throw ConfigError("unknown distribution kind: " + kind);
}

json grid_to_json(const core::Grid& grid) {
    json points = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        json p = distribution_to_json(grid[i]);
        p["round"] = grid.round_of(i);
        points.push_back(std::move(p));
    }
    return json{{"points", std::move(points)}};
}

void grid_from_json(const json& j, core::Grid& grid) {
    for (const auto& p : j.at("points")) grid.add(distribution_from_json(p), p.value("round", 1));
}

json functional_to_json(const core::Functional& f) {
    json j;
    switch (f.kind()) {
        case core::Functional::Kind::mean:
            j["kind"] = "mean";
            break;
        case core::Functional::Kind::shannon_entropy:
            j["kind"] = "entropy";
            break;
        case core::Functional::Kind::expected_new_categories:
            j["kind"] = "new_categories";
            j["n"] = f.sample_size();
            j["m"] = f.future_size();
            break;
        case core::Functional::Kind::indicator:
            j["kind"] = "indicator";
            j["lo"] = f.interval_lo();
            j["hi"] = f.interval_hi();
            j["inner"] = functional_to_json(f.inner());
            break;
        case core::Functional::Kind::power:
            j["kind"] = "power";
            j["kappa"] = f.exponent();
            j["inner"] = functional_to_json(f.inner());
            break;
        case core::Functional::Kind::negated:
            j["kind"] = "negated";
            j["inner"] = functional_to_json(f.inner());
            break;
    }
    return j;
}

core::Functional functional_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mean") return core::Functional::mean();
    if (kind == "entropy") return core::Functional::shannon_entropy();
    if (kind == "new_categories")
        return core::Functional::expected_new_categories(j.at("n").get<int>(),
                                                         j.at("m").get<int>());
    if (kind == "indicator")
        return core::Functional::indicator(functional_from_json(j.at("inner")),
                                           j.at("lo").get<double>(), j.at("hi").get<double>());
    if (kind == "power")
        return core::Functional::power(functional_from_json(j.at("inner")),
                                       j.at("kappa").get<double>());
    if (kind == "negated") return core::Functional::negated(functional_from_json(j.at("inner")));
    throw ConfigError("unknown functional kind: " + kind);
}

json constraint_to_json(const core::MomentConstraint& k) {
    return json{{"functional", functional_to_json(k.functional)},
                {"bound", k.bound},
                {"label", k.label}};
}

core::MomentConstraint constraint_from_json(const json& j) {
    return core::MomentConstraint::upper(functional_from_json(j.at("functional")),
                                         j.at("bound").get<double>(), j.value("label", ""));
}

json lp_problem_to_json(const lp::LpProblem& p) {
    return json{{"objective", p.objective}, {"rows", p.rows}, {"bounds", p.bounds}};
}

lp::LpProblem lp_problem_from_json(const json& j) {
    lp::LpProblem p;
    p.objective = j.at("objective").get<std::vector<double>>();
    if (j.contains("rows")) p.rows = j.at("rows").get<std::vector<std::vector<double>>>();
    if (j.contains("bounds")) p.bounds = j.at("bounds").get<std::vector<double>>();
    p.validate();
    return p;
}

namespace {

json architecture_to_json(const nets::Architecture& a) {
    json j;
    switch (a.family()) {
        case nets::Architecture::Family::affine_mean:
            j["family"] = "affine_mean";
            break;
        case nets::Architecture::Family::skn: {
            j["family"] = "skn";
            j["n"] = a.sample_size();
            j["m"] = a.future_size();
            j["hidden"] = a.hidden();
            json names = json::array();
            for (auto k : a.baselines()) names.push_back(nets::baseline_name(k));
            j["baselines"] = std::move(names);
            j["init_weights"] = a.init_baseline_weights();
            break;
        }
        case nets::Architecture::Family::deepset_skn:
            j["family"] = "deepset_skn";
            j["n"] = a.sample_size();
            j["phi1"] = a.phi1();
            j["phi2"] = a.phi2();
            j["rho1"] = a.rho1();
            break;
        case nets::Architecture::Family::elm:
            j["family"] = "elm";
            j["input"] = a.elm_input() == nets::ElmInput::real_sample ? "real_sample"
                                                                      : "fingerprint";
            j["input_dim"] = a.input_dim();
            j["hidden"] = a.hidden();
            j["frozen_seed"] = a.frozen_seed();
            j["n"] = a.sample_size();
            j["m"] = a.future_size();
            break;
    }
    return j;
}

nets::Architecture architecture_from_json(const json& j) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "affine_mean") return nets::Architecture::affine_mean();
    if (family == "skn") {
        std::vector<nets::BaselineKind> baselines;
        for (const auto& name : j.at("baselines"))
            baselines.push_back(nets::baseline_from_name(name.get<std::string>()));
        return nets::Architecture::skn(j.at("n").get<int>(), j.value("m", 0),
                                       std::move(baselines),
                                       j.at("init_weights").get<std::vector<double>>(),
                                       j.value("hidden", 50));
    }
    if (family == "deepset_skn")
        return nets::Architecture::deepset_skn(j.at("n").get<int>(), j.value("phi1", 10),
                                               j.value("phi2", 5), j.value("rho1", 10));
    if (family == "elm")
        return nets::Architecture::elm(
            j.at("input").get<std::string>() == "real_sample" ? nets::ElmInput::real_sample
                                                              : nets::ElmInput::fingerprint,
            j.at("input_dim").get<int>(), j.at("hidden").get<int>(),
            j.at("frozen_seed").get<std::uint64_t>(), j.value("n", 0), j.value("m", 0));
    throw ConfigError("unknown estimator family: " + family);
}

}  // namespace

json checkpoint_to_json(const nets::EstimatorParams& d) {
    return json{{"layout", "v1"},
                {"architecture", architecture_to_json(d.arch)},
                {"init_seed", d.init_seed},
                {"beta", d.beta}};
}

nets::EstimatorParams checkpoint_from_json(const json& j) {
    if (j.value("layout", "") != "v1") throw ConfigError("checkpoint: unsupported layout tag");
    nets::EstimatorParams d;
    d.arch = architecture_from_json(j.at("architecture"));
    d.init_seed = j.value("init_seed", std::uint64_t{0});
    d.beta = j.at("beta").get<std::vector<double>>();
    if (d.beta.size() != d.arch.param_count())
        throw ConfigError("checkpoint: coefficient count does not match architecture");
    return d;
}

std::string grid_summary_csv(
    const core::Grid& grid,
    const std::vector<std::pair<std::string, core::Functional>>& functionals) {
    std::ostringstream os;
    os << "index,kind,K";
    for (const auto& [name, f] : functionals) os << ',' << name;
    os << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto& p = grid[i];
        const std::size_t k = p.is_point_support() ? p.points().size() : p.category_count();
        os << i << ',' << (p.is_point_support() ? "point_support" : "multinomial") << ',' << k;
        for (const auto& [name, f] : functionals) os << ',' << fmt(core::eval_functional(f, p));
        os << '\n';
    }
    return os.str();
}

std::string risk_table_csv(const risk::RiskTable& table) {
    std::ostringstream os;
    os << "index,risk,replications,seed\n";
    for (std::size_t i = 0; i < table.values.size(); ++i) {
        os << i << ',' << fmt(table.values[i]) << ',' << (table.exact ? 0 : table.mc.replications)
           << ',' << (table.exact ? 0 : table.mc.seed) << '\n';
    }
    return os.str();
}

std::string trace_csv(const solvers::SolverTrace& trace) {
    std::ostringstream os;
    os << "iteration,bayes_risk,lower,upper\n";
    for (const auto& pt : trace.points) {
        os << pt.iteration << ',' << fmt(pt.bayes_risk) << ',';
        if (pt.has_bounds)
            os << fmt(pt.lower) << ',' << fmt(pt.upper);
        else
            os << ',';
        os << '\n';
    }
    return os.str();
}

json round_report_to_json(const outer::RoundReport& report, const std::string& checkpoint_path) {
    json prior = json::array();
    for (std::size_t i = 0; i < report.least_favorable.weights.size(); ++i)
        if (report.least_favorable.weights[i] > 0.0)
            prior.push_back(json{{"index", i}, {"weight", report.least_favorable.weights[i]}});
    return json{{"round", report.round},
                {"grid_size", report.grid_size},
                {"r_sup_current", report.r_sup_current},
                {"r_sup_next", report.r_sup_next},
                {"r_sup_current_se", report.r_sup_current_se},
                {"r_sup_next_se", report.r_sup_next_se},
                {"stop", report.stop},
                {"checkpoint", checkpoint_path},
                {"least_favorable", std::move(prior)}};
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
    if (!out.good()) throw Error("short write to " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace gmx::io
