#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gmx/distribution.hpp"
#include "gmx/functional.hpp"
#include "gmx/grid.hpp"
#include "gmx/risk.hpp"
#include "gmx/rng.hpp"

namespace gmx::gridgen {

// Unnormalized log-density over distributions expressing consistency with
// prior information. Components: a normal density evaluated at a functional
// value (sd chosen so the central 95% interval matches a configured one) and
// a negative-binomial density on the category count.
struct PseudoPriorComponent {
    enum class Kind { normal_on_functional, negbinomial_on_k };

    Kind kind = Kind::normal_on_functional;
    core::Functional functional = core::Functional::mean();
    double mu = 0.0, sigma = 1.0;
    double success_prob = 0.0;
    int failures = 0;
    double weight = 0.0;  // log-density weight

    static PseudoPriorComponent normal_on(core::Functional f, double mean, double interval95_lo,
                                          double interval95_hi, double weight);
    static PseudoPriorComponent negbinomial_on_k(double success_prob, int failures, double weight);
};

struct PseudoPrior {
    std::vector<PseudoPriorComponent> components;
};

double pseudo_prior_logdensity(const PseudoPrior& tau, const core::Distribution& p);

struct McmcConfig {
    int iterations = 1000;
    double p_perturb = 0.8, p_birth = 0.1, p_death = 0.1;
    double dirichlet_alpha = 200.0;  // perturb concentration
    double birth_mass = 0.05;        // epsilon_b in (0, 0.5)
    std::uint64_t seed = 0;
    int start_categories = 50;  // uniform start state when none is given

    void validate() const;
};

// One proposed move with its forward/reverse log transition densities
// (including any dimension-matching correction) and a label for diagnostics.
struct Proposal {
    explicit Proposal(core::Distribution s) : state(std::move(s)) {}

    core::Distribution state;
    double log_fwd = 0.0;
    double log_rev = 0.0;
    const char* type = "move";
    bool valid = true;  // invalid proposals are counted and rejected
};

class ProposalKernel {
public:
    virtual ~ProposalKernel() = default;
    virtual Proposal propose(const core::Distribution& current, rng::Stream& rng) const = 0;
};

// Production kernel over multinomial laws: Dirichlet perturbation plus
// birth/death moves with the Green proposal-ratio correction.
class MultinomialKernel final : public ProposalKernel {
public:
    explicit MultinomialKernel(const McmcConfig& cfg);
    Proposal propose(const core::Distribution& current, rng::Stream& rng) const override;

private:
    McmcConfig cfg_;
};

struct McmcDiagnostics {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> moves;  // type -> (proposed, accepted)
    std::int64_t accepted_total = 0;
    std::int64_t unique_added = 0;
    bool all_rejected = false;

    double acceptance_rate() const;
};

// Runs T Metropolis-Hastings-Green steps targeting R(d, P) * tau(P) and
// appends the unique visited states to the grid (round tag `round`).
// risk_of_state must be a strictly positive deterministic function of the
// state. A custom kernel replaces the production proposals (used by the
// enumerable toy targets in the tests).
McmcDiagnostics mcmc_refine(core::Grid& grid, int round,
                            const std::function<double(const core::Distribution&)>& risk_of_state,
                            const PseudoPrior& tau, const McmcConfig& cfg,
                            const core::Distribution* start = nullptr,
                            const ProposalKernel* kernel = nullptr);

// Deterministic per-state Monte Carlo risk: the replication streams are
// derived from a content hash of the state, so revisiting a state reproduces
// the same value (the MH target stays a function of the state alone).
std::function<double(const core::Distribution&)> make_deterministic_mc_risk(
    risk::EstimatorFn d, core::Functional target, int n, int reps, std::uint64_t master_seed);

// Structured generator for the mean problem. Round 1: `initial_count` random
// two-point {0,1} laws plus the point masses at 0 and 1. Later rounds:
// `reweight_count` fresh weightings of the existing support plus
// `fresh_count` laws on the support extended by `fresh_support` new uniform
// points.
struct StructuredGridConfig {
    int initial_count = 2000;
    int reweight_count = 500;
    int fresh_support = 10;
    int fresh_count = 1000;
};

void structured_mean_grid(core::Grid& grid, int round, const StructuredGridConfig& cfg,
                          std::uint64_t master_seed);

}  // namespace gmx::gridgen
