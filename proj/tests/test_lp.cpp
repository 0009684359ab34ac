#include <doctest.h>

#include <cmath>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"
#include "gmx/lp.hpp"
#include "gmx/rng.hpp"

using namespace gmx;
using lp::LpProblem;

namespace {

bool feasible(const LpProblem& p, const std::vector<double>& pi, double tol = 1e-9) {
    double total = 0.0;
    for (double w : pi) {
        if (w < -tol) return false;
        total += w;
    }
    if (std::fabs(total - 1.0) > tol) return false;
    for (std::size_t k = 0; k < p.rows.size(); ++k)
        if (kernels::dot(p.rows[k].data(), pi.data(), pi.size()) > p.bounds[k] + tol) return false;
    return true;
}

// Random feasible instances: bounds are taken at a random convex
// combination of the row values, so the polytope is never empty.
LpProblem random_instance(rng::Stream& rng, std::size_t max_vars = 8, std::size_t max_rows = 2) {
    LpProblem p;
    const std::size_t n = 1 + rng.index_below(max_vars);
    const std::size_t k = rng.index_below(max_rows + 1);
    p.objective.resize(n);
    for (double& v : p.objective) v = rng.next_uniform(-1.0, 1.0);
    std::vector<double> mix(n);
    double total = 0.0;
    for (double& w : mix) {
        w = -std::log(rng.next_open());
        total += w;
    }
    for (double& w : mix) w /= total;
    for (std::size_t row = 0; row < k; ++row) {
        std::vector<double> r(n);
        for (double& v : r) v = rng.next_uniform(-1.0, 1.0);
        const double at_mix = kernels::dot(r.data(), mix.data(), n);
        p.rows.push_back(std::move(r));
        p.bounds.push_back(at_mix + rng.next_uniform(0.0, 0.5));
    }
    return p;
}

}  // namespace

TEST_CASE("vertex at the best coefficient when unconstrained") {
    LpProblem p;
    p.objective = {1.0, 2.0, 3.0};
    const auto sol = lp::solve_least_favorable(p);
    CHECK(sol.value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(sol.weights[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("equality-constrained instance reproduces the enumerated optimum") {
    LpProblem p;
    p.objective = {0.0, 0.0, 1.0};
    p.rows = {{0.1, 0.5, 0.9}, {-0.1, -0.5, -0.9}};
    p.bounds = {0.3, -0.3};
    const auto sol = lp::solve_least_favorable(p);
    CHECK(sol.value == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(sol.weights[0] == doctest::Approx(0.75).epsilon(1e-9));
    CHECK(sol.weights[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(sol.weights[2] == doctest::Approx(0.25).epsilon(1e-9));

    const auto oracle = lp::brute_force_lfp(p);
    CHECK(oracle.value == doctest::Approx(sol.value).epsilon(1e-12));
}

TEST_CASE("infeasible constraint set is reported") {
    LpProblem p;
    p.objective = {5.0};
    p.rows = {{0.9}, {-0.9}};
    p.bounds = {0.3, -0.3};
    CHECK_THROWS_AS(lp::solve_least_favorable(p), Infeasible);
    CHECK_THROWS_AS(lp::brute_force_lfp(p), Infeasible);
}

TEST_CASE("brute force: degenerate ties and singletons") {
    LpProblem ties;
    ties.objective = {1.0, 1.0};
    CHECK(lp::brute_force_lfp(ties).value == doctest::Approx(1.0).epsilon(1e-12));

    LpProblem single;
    single.objective = {0.7};
    const auto sol = lp::brute_force_lfp(single);
    CHECK(sol.weights == std::vector<double>{1.0});

    LpProblem big;
    big.objective.assign(11, 0.0);
    CHECK_THROWS_AS(lp::brute_force_lfp(big), SizeLimit);
}

TEST_CASE("simplex matches the brute-force oracle on 1000 random instances") {
    rng::Stream rng(rng::derive_seed(11, 4));
    int infeasible_count = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const LpProblem p = random_instance(rng);
        bool oracle_ok = true;
        lp::LpSolution oracle;
        try {
            oracle = lp::brute_force_lfp(p);
        } catch (const Infeasible&) {
            oracle_ok = false;
        }
        if (!oracle_ok) {
            ++infeasible_count;
            CHECK_THROWS_AS(lp::solve_least_favorable(p), Infeasible);
            continue;
        }
        const auto sol = lp::solve_least_favorable(p);
        CHECK(std::fabs(sol.value - oracle.value) <= 1e-9);
        CHECK(feasible(p, sol.weights));
    }
    // Instance construction guarantees feasibility.
    CHECK(infeasible_count == 0);
}

TEST_CASE("redundant constraints never change the optimum") {
    rng::Stream rng(rng::derive_seed(12, 4));
    for (int trial = 0; trial < 100; ++trial) {
        LpProblem p = random_instance(rng);
        const auto before = lp::solve_least_favorable(p);
        std::vector<double> row(p.objective.size());
        for (double& v : row) v = rng.next_uniform(-1.0, 1.0);
        const double bound = *std::max_element(row.begin(), row.end());
        p.rows.push_back(row);
        p.bounds.push_back(bound);  // satisfied by every simplex point
        const auto after = lp::solve_least_favorable(p);
        CHECK(after.value == doctest::Approx(before.value).epsilon(1e-9));
    }
}

TEST_CASE("appending a grid point never decreases the optimal value") {
    rng::Stream rng(rng::derive_seed(13, 4));
    for (int trial = 0; trial < 100; ++trial) {
        LpProblem p = random_instance(rng);
        const auto before = lp::solve_least_favorable(p);
        p.objective.push_back(rng.next_uniform(-1.0, 1.0));
        for (auto& row : p.rows) row.push_back(rng.next_uniform(-1.0, 1.0));
        const auto after = lp::solve_least_favorable(p);
        CHECK(after.value >= before.value - 1e-9);
    }
}

TEST_CASE("deterministic pivoting: identical input, identical vertex") {
    rng::Stream rng(rng::derive_seed(14, 4));
    const LpProblem p = random_instance(rng, 8, 2);
    const auto a = lp::solve_least_favorable(p);
    const auto b = lp::solve_least_favorable(p);
    CHECK(a.value == b.value);
    CHECK(a.weights == b.weights);
}
