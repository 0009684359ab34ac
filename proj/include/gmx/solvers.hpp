#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gmx/grid.hpp"
#include "gmx/nets.hpp"
#include "gmx/risk.hpp"

namespace gmx::solvers {

struct SolverConfig {
    double eta = 0.005;      // learning rate
    int batch_j = 50;        // gradient batch size J
    int batch_jprime = 50;   // max-oracle batch size J'
    int iterations = 2000;   // iteration budget T
    double zeta = 0.0;       // max-oracle accuracy (the LP oracle is exact)
    int trace_cadence = 50;  // log every k iterations
    bool exact_max_oracle = false;  // J' -> exact risks in the max step

    void validate() const;
};

struct TracePoint {
    int iteration = 0;
    double bayes_risk = 0.0;  // Bayes risk against the current adversary prior
    double lower = 0.0;       // fictitious play: r(d_t, pi_{t-1})
    double upper = 0.0;       // fictitious play: r(mix_{t-1}, pi_t)
    bool has_bounds = false;
};

struct SolverTrace {
    std::vector<TracePoint> points;
};

// Exact risk (and risk gradient) of a parameterized estimator under one
// grid point; the affine family has closed forms.
class ExactRiskProvider {
public:
    virtual ~ExactRiskProvider() = default;
    virtual double risk(const nets::EstimatorParams& d, const core::Distribution& p,
                        int n) const = 0;
    // acc += weight * grad_beta R(d, p)
    virtual void add_risk_grad(const nets::EstimatorParams& d, const core::Distribution& p, int n,
                               double weight, std::vector<double>& acc) const = 0;
};

const ExactRiskProvider& affine_exact_provider();

struct GdResult {
    nets::EstimatorParams params;
    SolverTrace trace;
    std::vector<double> last_prior;  // the max-oracle's final prior
};

// Gradient descent with an exact max-oracle: per iteration, the LP finds the
// least favorable prior on exact risks, then a full gradient step follows.
GdResult gdmax(const nets::EstimatorParams& d0, const core::Grid& grid,
               const std::vector<core::MomentConstraint>& constraints, int n,
               const SolverConfig& cfg, const ExactRiskProvider& provider);

// Convenient SGDmax: the stochastic max step solves the LP on risks averaged
// over J' Monte Carlo draws, then an independent J-draw batch feeds the
// stochastic gradient step. With cfg.exact_max_oracle and an exact provider
// for the gradient path it degenerates to gdmax exactly.
GdResult sgdmax_convenient(const nets::EstimatorParams& d0, const core::Grid& grid,
                           const std::vector<core::MomentConstraint>& constraints,
                           const core::Functional& target, int n, const SolverConfig& cfg,
                           std::uint64_t master_seed, int threads = 1,
                           const ExactRiskProvider* exact = nullptr);

// SGDmax with the stochastic maximization realized by the same LP on
// estimated risks (the convenient variant is the concrete implementation).
GdResult sgdmax(const nets::EstimatorParams& d0, const core::Grid& grid,
                const std::vector<core::MomentConstraint>& constraints,
                const core::Functional& target, int n, const SolverConfig& cfg,
                std::uint64_t master_seed, int threads = 1,
                const ExactRiskProvider* exact = nullptr);

// Exact Bayes best response argmin_d r(d, pi): closed-form normal equations
// for the affine family. Falls back to the constant prior-mean estimator
// when the grid carries no spread.
nets::EstimatorParams affine_best_response(const core::Grid& grid,
                                           const std::vector<double>& prior, int n);

using BestResponse =
    std::function<nets::EstimatorParams(const core::Grid&, const std::vector<double>&)>;

struct FictitiousResult {
    nets::MixtureEstimator mixture;
    core::PriorWeights prior;
    SolverTrace trace;
    double min_gap = 0.0;  // running minimum of upper - lower
};

// Fictitious play over (estimator, prior) with exact risks. Records the
// sandwich bounds r(d_t, pi_{t-1}) <= v* <= r(mix_{t-1}, pi_t) each
// iteration. respond_to_latest uses pi_t instead of pi_{t-1} in the
// estimator's best response.
FictitiousResult fictitious_play(const nets::MixtureEstimator& mix0,
                                 const core::PriorWeights& pi0, const core::Grid& grid,
                                 const std::vector<core::MomentConstraint>& constraints, int n,
                                 int iterations, const ExactRiskProvider& provider,
                                 const BestResponse& best_response,
                                 bool respond_to_latest = false, int trace_cadence = 100);

// Exact Gamma_l-minimax over the affine family for the equality prior-mean
// constraint: maximizes the concave saddle value S*W/(S+W) over the feasible
// prior-moment polygon (S = prior variance of the mean, W = prior-averaged
// sampling variance / n), walking the polygon's Pareto frontier with
// directional LPs.
struct AffineMinimax {
    double b0 = 0.0, b1 = 0.0;
    double value = 0.0;
    std::vector<double> prior;
};

AffineMinimax affine_minimax_exact(const core::Grid& grid, double mu, int n);

}  // namespace gmx::solvers
