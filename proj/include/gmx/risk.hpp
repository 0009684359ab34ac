#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gmx/distribution.hpp"
#include "gmx/functional.hpp"
#include "gmx/grid.hpp"
#include "gmx/lp.hpp"
#include "gmx/rng.hpp"

namespace gmx::risk {

// Any estimator, reduced to its evaluation map.
using EstimatorFn = std::function<double(const core::Observation&)>;

struct MonteCarloProvenance {
    int replications = 0;
    std::uint64_t seed = 0;
};

// Per-grid-point risks with provenance.
struct RiskTable {
    std::uint64_t grid_id = 0;
    std::vector<double> values;
    bool exact = true;
    MonteCarloProvenance mc;
};

// Closed-form risk of the affine-in-sample-mean estimator
// x -> b0 + b1 * mean(x) on a point-support law:
// (b0 + (b1-1) psi)^2 + b1^2 Var/n.
double exact_risk_affine(double b0, double b1, const core::Distribution& p, int n);

// One simulated dataset plus its per-draw target. For mean and entropy the
// target is Psi(P); for new-categories it is the conditional expectation
// sum_k 1{X_k=0} (1-(1-p_k)^m) computed from that draw's unseen categories.
struct Draw {
    core::Observation obs;
    double target = 0.0;
};

Draw draw_observation(const core::Distribution& p, const core::Functional& target, int n,
                      rng::Stream& rng);

struct McEstimate {
    double value = 0.0;  // mean squared error estimate
    double se = 0.0;     // standard error of the estimate
};

// Plain Monte Carlo risk with reps independent replications; replication j
// uses rng.replication_stream(point_index, j).
McEstimate mc_risk(const EstimatorFn& d, const core::Functional& target,
                   const core::Distribution& p, int n, int reps, const rng::RngSpec& rng,
                   std::uint64_t point_index = 0);

double bayes_risk(const RiskTable& table, const core::PriorWeights& pi);

// Full risk table over a grid; points are evaluated independently (and may
// be evaluated concurrently), each on its own derived streams.
RiskTable mc_risk_table(const EstimatorFn& d, const core::Functional& target,
                        const core::Grid& grid, int n, int reps, const rng::RngSpec& rng,
                        int threads = 1);

struct TwoStageResult {
    double value = 0.0;        // debiased maximal Bayes risk estimate
    double se = 0.0;           // standard error from stage-2 variation
    double stage1_value = 0.0; // the (positively biased) single-stage value
    core::PriorWeights prior;  // stage-1 least favorable prior
};

// Two-stage debiased estimate of sup_pi r(d, pi) over the constrained grid
// simplex: stage A picks the prior, an independent stage B prices it.
// swap_stages exchanges the two streams' roles.
TwoStageResult two_stage_max_bayes_risk(const EstimatorFn& d, const core::Functional& target,
                                        const core::Grid& grid,
                                        const std::vector<core::MomentConstraint>& constraints,
                                        int n, int reps, const rng::RngSpec& rng, int threads = 1,
                                        bool swap_stages = false);

// Exact-table variant: the LP value on exact risks (no debiasing needed).
TwoStageResult max_bayes_risk_exact(const RiskTable& table, const core::Grid& grid,
                                    const std::vector<core::MomentConstraint>& constraints);

// Static chunked parallel loop used for risk tables; results are identical
// for every thread count because streams are derived per point.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace gmx::risk
