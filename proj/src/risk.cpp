#include "gmx/risk.hpp"

#include <cmath>
#include <thread>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"

namespace gmx::risk {

double exact_risk_affine(double b0, double b1, const core::Distribution& p, int n) {
    if (!p.is_point_support()) throw VariantMismatch("exact_risk_affine needs point support");
    if (n < 1) throw InvalidArgument("exact_risk_affine: n < 1");
    const double psi = p.mean();
    const double bias = b0 + (b1 - 1.0) * psi;
    return bias * bias + b1 * b1 * p.variance() / static_cast<double>(n);
}

Draw draw_observation(const core::Distribution& p, const core::Functional& target, int n,
                      rng::Stream& rng) {
    Draw d{core::Observation::real_sample({}), 0.0};
    if (p.is_point_support()) {
        std::vector<double> values;
        p.sample_values(n, rng, values);
        d.obs = core::Observation::real_sample(std::move(values), p.lower(), p.upper());
        d.target = eval_functional(target, p);
        return d;
    }
    std::vector<std::int64_t> counts;
    p.sample_counts(n, rng, counts);
    d.obs = core::Observation::from_full_counts(counts, n);
    if (target.kind() == core::Functional::Kind::expected_new_categories) {
        // Conditional target given the full draw: unseen categories only.
        const auto& probs = p.probs();
        const int m = target.future_size();
        double acc = 0.0;
        for (std::size_t k = 0; k < probs.size(); ++k)
            if (counts[k] == 0) acc += 1.0 - std::pow(1.0 - probs[k], m);
        d.target = acc;
    } else {
        d.target = eval_functional(target, p);
    }
    return d;
}

McEstimate mc_risk(const EstimatorFn& d, const core::Functional& target,
                   const core::Distribution& p, int n, int reps, const rng::RngSpec& rng,
                   std::uint64_t point_index) {
    if (reps < 1) throw InvalidArgument("mc_risk: reps < 1");
    double acc = 0.0, acc2 = 0.0;
    for (int j = 0; j < reps; ++j) {
        rng::Stream stream = rng.replication_stream(point_index, static_cast<std::uint64_t>(j));
        const Draw draw = draw_observation(p, target, n, stream);
        const double err = d(draw.obs) - draw.target;
        const double sq = err * err;
        acc += sq;
        acc2 += sq * sq;
    }
    McEstimate est;
    est.value = acc / reps;
    if (reps > 1) {
        const double var = (acc2 - acc * acc / reps) / (reps - 1);
        est.se = std::sqrt(var > 0.0 ? var / reps : 0.0);
    }
    return est;
}

double bayes_risk(const RiskTable& table, const core::PriorWeights& pi) {
    if (table.grid_id != pi.grid_id || table.values.size() != pi.weights.size())
        throw GridMismatch("bayes_risk: table and prior use different grids");
    return kernels::dot(table.values.data(), pi.weights.data(), pi.weights.size());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads < 2 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t nthreads = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = t; i < count; i += nthreads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

RiskTable mc_risk_table(const EstimatorFn& d, const core::Functional& target,
                        const core::Grid& grid, int n, int reps, const rng::RngSpec& rng,
                        int threads) {
    RiskTable table;
    table.grid_id = grid.id();
    table.values.assign(grid.size(), 0.0);
    table.exact = false;
    table.mc = {reps, rng.master_seed};
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        table.values[i] = mc_risk(d, target, grid[i], n, reps, rng, i).value;
    });
    return table;
}

namespace {

// Per-point standard errors alongside the table, for the two-stage SE.
struct TableWithSe {
    RiskTable table;
    std::vector<double> se;
};

TableWithSe mc_table_with_se(const EstimatorFn& d, const core::Functional& target,
                             const core::Grid& grid, int n, int reps, const rng::RngSpec& rng,
                             int threads) {
    TableWithSe out;
    out.table.grid_id = grid.id();
    out.table.values.assign(grid.size(), 0.0);
    out.table.exact = false;
    out.table.mc = {reps, rng.master_seed};
    out.se.assign(grid.size(), 0.0);
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const McEstimate est = mc_risk(d, target, grid[i], n, reps, rng, i);
        out.table.values[i] = est.value;
        out.se[i] = est.se;
    });
    return out;
}

}  // namespace

TwoStageResult two_stage_max_bayes_risk(const EstimatorFn& d, const core::Functional& target,
                                        const core::Grid& grid,
                                        const std::vector<core::MomentConstraint>& constraints,
                                        int n, int reps, const rng::RngSpec& rng, int threads,
                                        bool swap_stages) {
    const rng::Stage pick = swap_stages ? rng::Stage::risk_stage_b : rng::Stage::risk_stage_a;
    const rng::Stage price = swap_stages ? rng::Stage::risk_stage_a : rng::Stage::risk_stage_b;
    const RiskTable stage_a =
        mc_risk_table(d, target, grid, n, reps, rng.with_stage(pick), threads);
    lp::LpProblem prob = lp::LpProblem::from_grid(stage_a.values, constraints, grid);
    const lp::LpSolution sol = lp::solve_least_favorable(prob);

    TwoStageResult out;
    out.stage1_value = sol.value;
    out.prior = core::PriorWeights::validated(grid, sol.weights, constraints);

    const TableWithSe stage_b =
        mc_table_with_se(d, target, grid, n, reps, rng.with_stage(price), threads);
    out.value = bayes_risk(stage_b.table, out.prior);
    double var = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double w = out.prior.weights[i];
        var += w * w * stage_b.se[i] * stage_b.se[i];
    }
    out.se = std::sqrt(var);
    return out;
}

TwoStageResult max_bayes_risk_exact(const RiskTable& table, const core::Grid& grid,
                                    const std::vector<core::MomentConstraint>& constraints) {
    if (table.grid_id != grid.id() || table.values.size() != grid.size())
        throw GridMismatch("max_bayes_risk_exact: table does not match grid");
    lp::LpProblem prob = lp::LpProblem::from_grid(table.values, constraints, grid);
    const lp::LpSolution sol = lp::solve_least_favorable(prob);
    TwoStageResult out;
    out.value = sol.value;
    out.stage1_value = sol.value;
    out.se = 0.0;
    out.prior = core::PriorWeights::validated(grid, sol.weights, constraints);
    return out;
}

}  // namespace gmx::risk
