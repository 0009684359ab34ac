#pragma once

#include <cstddef>
#include <vector>

#include "gmx/functional.hpp"
#include "gmx/grid.hpp"

namespace gmx::lp {

// The adversary's problem: maximize objective . pi over the simplex
// intersected with the moment rows (rows[k] . pi <= bounds[k]).
struct LpProblem {
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<double> bounds;

    static LpProblem from_grid(std::vector<double> objective,
                               const std::vector<core::MomentConstraint>& constraints,
                               const core::Grid& grid);

    void validate() const;
};

struct LpSolution {
    std::vector<double> weights;
    double value = 0.0;
    std::vector<std::size_t> active_rows;  // moment rows tight at the optimum
};

// Dense two-phase simplex with Bland's pivot rule. Deterministic: identical
// input yields an identical vertex. Throws Infeasible when no prior on the
// grid satisfies the moment rows.
LpSolution solve_least_favorable(const LpProblem& p);

// Test oracle: enumerates every basic feasible solution. Limited to 10
// variables and 4 rows.
LpSolution brute_force_lfp(const LpProblem& p);

inline constexpr double kLpTol = 1e-9;

}  // namespace gmx::lp
