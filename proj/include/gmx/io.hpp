#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gmx/distribution.hpp"
#include "gmx/functional.hpp"
#include "gmx/grid.hpp"
#include "gmx/lp.hpp"
#include "gmx/nets.hpp"
#include "gmx/outer.hpp"
#include "gmx/risk.hpp"
#include "gmx/solvers.hpp"

namespace gmx::io {

using json = nlohmann::json;

// Distributions: {"kind":"point_support","support":[...],"weights":[...],
// "a":..,"b":..} or {"kind":"multinomial","probs":[...]}.
json distribution_to_json(const core::Distribution& p);
core::Distribution distribution_from_json(const json& j);

// Grids carry their points with the refinement round each point entered.
json grid_to_json(const core::Grid& grid);
void grid_from_json(const json& j, core::Grid& grid);

json functional_to_json(const core::Functional& f);
core::Functional functional_from_json(const json& j);

json constraint_to_json(const core::MomentConstraint& k);
core::MomentConstraint constraint_from_json(const json& j);

json lp_problem_to_json(const lp::LpProblem& p);
lp::LpProblem lp_problem_from_json(const json& j);

// Estimator checkpoints: architecture descriptor, seeds, flat coefficients,
// layout version tag.
json checkpoint_to_json(const nets::EstimatorParams& d);
nets::EstimatorParams checkpoint_from_json(const json& j);

// CSV emitters. Separator ',', decimal '.', one header line.
std::string grid_summary_csv(const core::Grid& grid,
                             const std::vector<std::pair<std::string, core::Functional>>& functionals);
std::string risk_table_csv(const risk::RiskTable& table);
std::string trace_csv(const solvers::SolverTrace& trace);

json round_report_to_json(const outer::RoundReport& report, const std::string& checkpoint_path);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);
json read_json(const std::string& path);

}  // namespace gmx::io
