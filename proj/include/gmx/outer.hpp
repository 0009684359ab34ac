#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gmx/grid.hpp"
#include "gmx/nets.hpp"
#include "gmx/risk.hpp"

namespace gmx::outer {

struct OuterConfig {
    int max_rounds = 5;
    double eps_rel = 0.02;   // stop when the refined-grid increase is small
    double eps_abs = 1e-4;   // in both relative and absolute terms
    int start_round = 1;     // resume support
    bool force_all_rounds = false;  // ignore the stop rule until max_rounds

    void validate() const;
};

struct RoundReport {
    int round = 0;
    std::size_t grid_size = 0;
    nets::EstimatorParams estimator;
    double r_sup_current = 0.0;  // estimate on this round's grid
    double r_sup_next = 0.0;     // estimate on the candidate refined grid
    double r_sup_current_se = 0.0;
    double r_sup_next_se = 0.0;
    core::PriorWeights least_favorable;
    std::string stop;  // "", "converged" or "budget"
};

// The three problem-specific callbacks the driver composes: grid refinement
// (append-only), the inner minimax solve (warm-started), and the maximal
// Bayes risk estimator used by the stopping rule.
struct Problem {
    std::function<void(core::Grid&, int round)> extend_grid;
    std::function<nets::EstimatorParams(const nets::EstimatorParams& warm_start,
                                        const core::Grid&, int round)>
        solve_inner;
    std::function<risk::TwoStageResult(const nets::EstimatorParams&, const core::Grid&)> r_sup;
    std::vector<core::MomentConstraint> constraints;  // for infeasibility diagnostics
};

// Names any constraint that no single grid point can satisfy.
std::string diagnose_infeasible(const core::Grid& grid,
                                const std::vector<core::MomentConstraint>& constraints);

// Refine, solve, check the stopping rule, repeat. The grid passed in is
// extended in place; the candidate grid built for a failed stopping check is
// reused as the next round's grid. `on_round` (when set) runs after each
// round, e.g. to persist checkpoints.
std::vector<RoundReport> run(const OuterConfig& cfg, const Problem& problem,
                             nets::EstimatorParams d0, core::Grid& grid,
                             const std::function<void(const RoundReport&)>& on_round = {});

}  // namespace gmx::outer
