#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gmx/gridgen.hpp"
#include "gmx/io.hpp"

namespace gmx::experiment {

// Command-line overrides applied on top of the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

// Parses, validates and runs a full experiment from a JSON config (see
// docs/config.md). Writes the run log, per-round traces and checkpoints,
// the final checkpoint and summary.json into the output directory; returns
// the summary.
io::json run_experiment(const std::string& config_path, const Overrides& overrides = {});

// Evaluates a checkpointed estimator on a JSON data file holding either
// {"values": [...]} or {"counts": [...], "n": N} (raw positive counts; the
// fingerprint is built here).
double eval_estimator(const std::string& checkpoint_path, const std::string& data_path);

// Exposed for tests and the acceptance suite: the paper-style preset
// constraint sets, rescaled so the paper's intervals track a synthetic
// population's true functional value.
std::vector<core::MomentConstraint> preset_constraints(const std::string& problem,
                                                       const std::string& preset, double truth,
                                                       const core::Functional& phi);

// The matching pseudo-prior (normal component on the functional, negative
// binomial on the category count).
gridgen::PseudoPrior preset_pseudo_prior(const std::string& problem, const std::string& preset,
                                         double truth, const core::Functional& phi,
                                         double functional_weight = 30.0, double k_weight = 10.0,
                                         double nb_success = 0.995, int nb_failures = 2);

// Zipf-like synthetic multinomial population: p_k proportional to k^-s.
core::Distribution zipf_population(int categories, double exponent);

}  // namespace gmx::experiment
