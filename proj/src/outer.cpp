#include "gmx/outer.hpp"

#include <algorithm>
#include <limits>

#include "gmx/errors.hpp"

namespace gmx::outer {

void OuterConfig::validate() const {
    if (max_rounds < 1) throw InvalidArgument("outer: max_rounds must be >= 1");
    if (eps_rel < 0.0 || eps_abs < 0.0) throw InvalidArgument("outer: tolerances must be >= 0");
    if (start_round < 1 || start_round > max_rounds)
        throw InvalidArgument("outer: start_round outside [1, max_rounds]");
}

std::string diagnose_infeasible(const core::Grid& grid,
                                const std::vector<core::MomentConstraint>& constraints) {
    std::string msg = "no feasible prior on the grid";
    bool named = false;
    for (const auto& k : constraints) {
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid.size(); ++i)
            lo = std::min(lo, core::eval_functional(k.functional, grid[i]));
        if (lo > k.bound + core::kConstraintTol) {
            msg += named ? ", " : "; unsatisfiable: ";
            msg += k.label;
            named = true;
        }
    }
    if (!named) msg += " (constraints only jointly infeasible)";
    return msg;
}

std::vector<RoundReport> run(const OuterConfig& cfg, const Problem& problem,
                             nets::EstimatorParams d0, core::Grid& grid,
                             const std::function<void(const RoundReport&)>& on_round) {
    cfg.validate();
    std::vector<RoundReport> reports;
    nets::EstimatorParams d = std::move(d0);

    try {
        for (int round = cfg.start_round; round <= cfg.max_rounds; ++round) {
            // A non-empty grid is either the previous round's candidate
            // refinement or a resumed checkpoint; both are this round's grid.
            if (grid.empty()) problem.extend_grid(grid, round);

            d = problem.solve_inner(d, grid, round);

            RoundReport report;
            report.round = round;
            report.grid_size = grid.size();
            report.estimator = d;

            const risk::TwoStageResult current = problem.r_sup(d, grid);
            report.r_sup_current = current.value;
            report.r_sup_current_se = current.se;
            report.least_favorable = current.prior;

            // Candidate refinement for the stopping statistic; kept as the
            // next round's grid when the check fails.
            problem.extend_grid(grid, round + 1);
            const risk::TwoStageResult next = problem.r_sup(d, grid);
            report.r_sup_next = next.value;
            report.r_sup_next_se = next.se;

            const double delta = next.value - current.value;
            const double tol = std::max(cfg.eps_abs, cfg.eps_rel * current.value);
            if (delta <= tol && !cfg.force_all_rounds)
                report.stop = "converged";
            else if (round == cfg.max_rounds)
                report.stop = "budget";

            reports.push_back(report);
            if (on_round) on_round(report);
            if (!report.stop.empty()) break;
        }
    } catch (const Infeasible&) {
        throw Infeasible(diagnose_infeasible(grid, problem.constraints));
    }
    return reports;
}

}  // namespace gmx::outer
