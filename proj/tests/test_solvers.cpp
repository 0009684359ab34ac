#include <doctest.h>

#include <cmath>
#include <limits>

#include "gmx/errors.hpp"
#include "gmx/gridgen.hpp"
#include "gmx/oracle.hpp"
#include "gmx/solvers.hpp"

using namespace gmx;
using core::Distribution;
using core::Functional;
using core::Grid;
using core::MomentConstraint;

namespace {

std::vector<core::MomentConstraint> mean_equality(double mu) {
    auto [up, lo] = MomentConstraint::equality(Functional::mean(), mu);
    return {up, lo};
}

Grid appendix_grid(std::uint64_t seed) {
    Grid grid;
    gridgen::structured_mean_grid(grid, 1, {}, seed);
    return grid;
}

}  // namespace

TEST_CASE("gdmax on a single point converges to that point's Bayes rule") {
    Grid grid;
    grid.add(Distribution::bernoulli(0.3), 1);
    solvers::SolverConfig cfg;
    cfg.eta = 0.5;  // curvature along the valley is ~0.004; keep eta < 2/L
    cfg.iterations = 20000;
    cfg.trace_cadence = 100;
    const auto d0 = nets::initialize(nets::Architecture::affine_mean(), 1);
    const auto res = solvers::gdmax(d0, grid, {}, 10, cfg, solvers::affine_exact_provider());

    // Point-mass prior: best response in closed form.
    const auto best = solvers::affine_best_response(grid, {1.0}, 10);
    CHECK(res.params.beta[0] == doctest::Approx(best.beta[0]).epsilon(1e-6));
    CHECK(res.params.beta[1] == doctest::Approx(best.beta[1]).epsilon(1e-5));

    // The risk trace decreases monotonically to its limit.
    const auto& pts = res.trace.points;
    for (std::size_t i = 1; i < pts.size(); ++i)
        CHECK(pts[i].bayes_risk <= pts[i - 1].bayes_risk + 1e-12);
    CHECK(pts.back().bayes_risk - risk::exact_risk_affine(best.beta[0], best.beta[1], grid[0], 10) <
          1e-6);
}

TEST_CASE("degenerate oracle: equal risks leave the gradient step defined") {
    Grid grid;
    grid.add(Distribution::bernoulli(0.3), 1);
    grid.add(Distribution::bernoulli(0.7), 1);  // same variance, symmetric
    solvers::SolverConfig cfg;
    cfg.eta = 0.0;
    cfg.iterations = 5;
    cfg.trace_cadence = 1;
    const auto d0 = nets::initialize(nets::Architecture::affine_mean(), 1);
    const auto res = solvers::gdmax(d0, grid, {}, 10, cfg, solvers::affine_exact_provider());
    CHECK(res.params.beta == d0.beta);
    for (const auto& pt : res.trace.points)
        CHECK(pt.bayes_risk == doctest::Approx(0.021).epsilon(1e-12));
}

TEST_CASE("sgdmax with eta=0 leaves parameters unchanged and the trace flat") {
    Grid grid = appendix_grid(3);
    solvers::SolverConfig cfg;
    cfg.eta = 0.0;
    cfg.iterations = 10;
    cfg.batch_j = 5;
    cfg.batch_jprime = 5;
    cfg.trace_cadence = 1;
    const auto d0 = nets::initialize(nets::Architecture::affine_mean(), 1);
    const auto res = solvers::sgdmax(d0, grid, mean_equality(0.3), Functional::mean(), 10, cfg,
                                     99, 1, nullptr);
    CHECK(res.params.beta == d0.beta);
}

TEST_CASE("sgdmax with the exact max-oracle reproduces gdmax bit for bit") {
    Grid grid = appendix_grid(4);
    solvers::SolverConfig cfg;
    cfg.eta = 0.005;
    cfg.iterations = 50;
    cfg.trace_cadence = 10;
    cfg.exact_max_oracle = true;
    const auto d0 = nets::initialize(nets::Architecture::affine_mean(), 1);
    const auto gd = solvers::gdmax(d0, grid, mean_equality(0.3), 10, cfg,
                                   solvers::affine_exact_provider());
    const auto sg = solvers::sgdmax(d0, grid, mean_equality(0.3), Functional::mean(), 10, cfg, 7,
                                    1, &solvers::affine_exact_provider());
    CHECK(sg.params.beta == gd.params.beta);
    REQUIRE(sg.trace.points.size() == gd.trace.points.size());
    for (std::size_t i = 0; i < sg.trace.points.size(); ++i)
        CHECK(sg.trace.points[i].bayes_risk == gd.trace.points[i].bayes_risk);
}

TEST_CASE("solver determinism: identical config and seed, identical trajectory") {
    Grid grid = appendix_grid(5);
    solvers::SolverConfig cfg;
    cfg.eta = 0.005;
    cfg.iterations = 30;
    cfg.batch_j = 10;
    cfg.batch_jprime = 10;
    cfg.trace_cadence = 5;
    const auto d0 = nets::initialize(nets::Architecture::affine_mean(), 1);
    const auto a = solvers::sgdmax(d0, grid, mean_equality(0.3), Functional::mean(), 10, cfg, 11,
                                   1, nullptr);
    const auto b = solvers::sgdmax(d0, grid, mean_equality(0.3), Functional::mean(), 10, cfg, 11,
                                   2, nullptr);
    CHECK(a.params.beta == b.params.beta);  // thread count must not matter
    for (std::size_t i = 0; i < a.trace.points.size(); ++i)
        CHECK(a.trace.points[i].bayes_risk == b.trace.points[i].bayes_risk);
}

TEST_CASE("stochastic max-oracle picks the true argmax more often with larger J'") {
    // Two points with close risks under the sample mean: p=0.5 has the
    // larger risk (0.025 vs 0.02275). J'=1 barely beats a coin flip;
    // J'=2000 identifies it in at least 95 of 100 seeds.
    Grid grid;
    grid.add(Distribution::bernoulli(0.35), 1);
    grid.add(Distribution::bernoulli(0.5), 1);
    const auto d0 = nets::initialize(nets::Architecture::affine_mean(), 1);
    const auto chosen_point = [&](int jprime, std::uint64_t seed) {
        solvers::SolverConfig cfg;
        cfg.eta = 0.0;
        cfg.iterations = 1;
        cfg.batch_jprime = jprime;
        cfg.batch_j = 1;
        cfg.trace_cadence = 1;
        const auto res = solvers::sgdmax(d0, grid, {}, Functional::mean(), 10, cfg, seed, 1,
                                         nullptr);
        return res.last_prior[1] > res.last_prior[0] ? 1 : 0;
    };
    int hits_small = 0, hits_large = 0;
    for (int s = 0; s < 100; ++s) {
        hits_small += chosen_point(1, 3000 + static_cast<std::uint64_t>(s));
        hits_large += chosen_point(2000, 3000 + static_cast<std::uint64_t>(s));
    }
    CHECK(hits_large >= 95);
    CHECK(hits_large > hits_small);
}

TEST_CASE("fictitious play: mixture update arithmetic and singleton grid") {
    Grid grid;
    grid.add(Distribution::bernoulli(0.3), 1);
    nets::MixtureEstimator mix0;
    mix0.members = {{nets::initialize(nets::Architecture::affine_mean(), 1), 1.0}};
    const auto pi0 = core::PriorWeights::validated(grid, {1.0});
    const auto res = solvers::fictitious_play(
        mix0, pi0, grid, {}, 10, 50, solvers::affine_exact_provider(),
        [](const Grid& g, const std::vector<double>& prior) {
            return solvers::affine_best_response(g, prior, 10);
        },
        false, 1);

    // The t=1 averaging step zeroes the initial member, and every best
    // response equals the point's Bayes rule, so the average is exactly it.
    const auto best = solvers::affine_best_response(grid, {1.0}, 10);
    const auto avg = nets::average_mixture(res.mixture);
    CHECK(avg.beta[0] == doctest::Approx(best.beta[0]).epsilon(1e-12));
    CHECK(avg.beta[1] == doctest::Approx(best.beta[1]).epsilon(1e-12));
    // Gap collapses immediately: the adversary has one prior.
    CHECK(res.min_gap <= 1e-12);

    // Prior averaging arithmetic: t=2 mixes (1,0) and (0,1) into (1/2,1/2).
    Grid two;
    two.add(Distribution::bernoulli(0.2), 1);
    two.add(Distribution::bernoulli(0.8), 1);
    std::vector<double> pi_avg{1.0, 0.0};
    const std::vector<double> pi_dagger{0.0, 1.0};
    const double t = 2.0;
    for (std::size_t i = 0; i < 2; ++i)
        pi_avg[i] = ((t - 1.0) * pi_avg[i] + pi_dagger[i]) / t;
    CHECK(pi_avg == std::vector<double>{0.5, 0.5});
}

TEST_CASE("fictitious play sandwich on a small exact instance") {
    Grid grid;
    for (double q : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9})
        grid.add(Distribution::bernoulli(q), 1);
    nets::MixtureEstimator mix0;
    mix0.members = {{nets::initialize(nets::Architecture::affine_mean(), 1), 1.0}};
    const auto constraints = mean_equality(0.3);
    const auto feasible = risk::max_bayes_risk_exact(
        risk::RiskTable{grid.id(), std::vector<double>(grid.size(), 0.0), true, {}}, grid,
        constraints);
    const auto res = solvers::fictitious_play(
        mix0, feasible.prior, grid, constraints, 10, 3000, solvers::affine_exact_provider(),
        [](const Grid& g, const std::vector<double>& prior) {
            return solvers::affine_best_response(g, prior, 10);
        },
        false, 1);
    double prev_running_min = std::numeric_limits<double>::infinity();
    for (const auto& pt : res.trace.points) {
        CHECK(pt.lower <= pt.upper + 1e-10);
        const double gap = pt.upper - pt.lower;
        CHECK(gap >= -1e-10);
        prev_running_min = std::min(prev_running_min, gap);
    }
    CHECK(res.min_gap <= prev_running_min + 1e-15);
    CHECK(res.min_gap < 1e-3);

    // Prior stays inside Gamma_l and both weight vectors stay simplex.
    double total = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(res.prior.weights[i] >= 0.0);
        total += res.prior.weights[i];
        mean += res.prior.weights[i] * grid[i].mean();
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(mean == doctest::Approx(0.3).epsilon(1e-8));
    double mix_total = 0.0;
    for (const auto& [member, w] : res.mixture.members) {
        CHECK(w >= 0.0);
        mix_total += w;
    }
    CHECK(mix_total == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("affine best response: degenerate prior falls back to the constant") {
    Grid grid;
    grid.add(Distribution::point_support({0.4}, {1.0}), 1);
    const auto d = solvers::affine_best_response(grid, {1.0}, 10);
    CHECK(d.beta[0] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(d.beta[1] == 0.0);
}

TEST_CASE("exact affine minimax matches the closed-form oracle on a rich grid") {
    Grid grid = appendix_grid(12);
    const auto exact = solvers::affine_minimax_exact(grid, 0.3, 10);
    const oracle::MeanProblemSpec spec{0.3, 10, 0.0, 1.0};
    const auto coef = oracle::gamma_minimax_affine(spec);
    // The grid optimum can only fall below the continuum optimum; with 2000
    // random Bernoullis it is close.
    CHECK(exact.value <= oracle::minimax_bayes_risk(spec) + 1e-12);
    CHECK(exact.value == doctest::Approx(oracle::minimax_bayes_risk(spec)).epsilon(1e-3));
    CHECK(exact.b0 == doctest::Approx(coef.b0).epsilon(0.02));
    CHECK(exact.b1 == doctest::Approx(coef.b1).epsilon(0.02));

    // Cross-check by the dual route: the LP's maximal Bayes risk of the
    // returned coefficients equals the saddle value.
    risk::RiskTable table{grid.id(), {}, true, {}};
    table.values.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        table.values[i] = risk::exact_risk_affine(exact.b0, exact.b1, grid[i], 10);
    const auto lp_route = risk::max_bayes_risk_exact(table, grid, mean_equality(0.3));
    CHECK(lp_route.value == doctest::Approx(exact.value).epsilon(1e-9));

    // And the returned prior prices the same value.
    double priced = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) priced += exact.prior[i] * table.values[i];
    CHECK(priced == doctest::Approx(exact.value).epsilon(1e-9));
}

TEST_CASE("infeasible constraints propagate from the solvers") {
    Grid grid;
    grid.add(Distribution::bernoulli(0.9), 1);
    solvers::SolverConfig cfg;
    cfg.iterations = 2;
    cfg.trace_cadence = 1;
    const auto d0 = nets::initialize(nets::Architecture::affine_mean(), 1);
    CHECK_THROWS_AS(
        solvers::gdmax(d0, grid, mean_equality(0.3), 10, cfg, solvers::affine_exact_provider()),
        Infeasible);
}
