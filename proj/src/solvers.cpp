#include "gmx/solvers.hpp"

#include <cmath>
#include <limits>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"
#include "gmx/lp.hpp"

namespace gmx::solvers {

namespace {

class AffineExact final : public ExactRiskProvider {
public:
    double risk(const nets::EstimatorParams& d, const core::Distribution& p,
                int n) const override {
        require_affine(d);
        return risk::exact_risk_affine(d.beta[0], d.beta[1], p, n);
    }

    void add_risk_grad(const nets::EstimatorParams& d, const core::Distribution& p, int n,
                       double weight, std::vector<double>& acc) const override {
        require_affine(d);
        const double psi = p.mean();
        const double bias = d.beta[0] + (d.beta[1] - 1.0) * psi;
        acc[0] += weight * 2.0 * bias;
        acc[1] += weight * 2.0 * (bias * psi + d.beta[1] * p.variance() / n);
    }

private:
    static void require_affine(const nets::EstimatorParams& d) {
        if (d.arch.family() != nets::Architecture::Family::affine_mean)
            throw VariantMismatch("affine risk provider given a non-affine estimator");
    }
};

std::vector<double> exact_risk_row(const ExactRiskProvider& provider,
                                   const nets::EstimatorParams& d, const core::Grid& grid,
                                   int n) {
    std::vector<double> row(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) row[i] = provider.risk(d, grid[i], n);
    return row;
}

void check_finite(const std::vector<double>& beta) {
    for (double b : beta)
        if (!std::isfinite(b)) throw Error("solver diverged: non-finite coefficient");
}

}  // namespace

void SolverConfig::validate() const {
    if (!(eta >= 0.0)) throw InvalidArgument("solver: eta must be >= 0");
    if (batch_j < 1 || batch_jprime < 1) throw InvalidArgument("solver: batch sizes must be >= 1");
    if (iterations < 1) throw InvalidArgument("solver: iteration budget must be >= 1");
    if (zeta < 0.0) throw InvalidArgument("solver: zeta must be >= 0");
    if (trace_cadence < 1 || trace_cadence > iterations)
        throw InvalidArgument("solver: trace cadence must be in [1, iterations]");
}

const ExactRiskProvider& affine_exact_provider() {
    static const AffineExact provider;
    return provider;
}

GdResult gdmax(const nets::EstimatorParams& d0, const core::Grid& grid,
               const std::vector<core::MomentConstraint>& constraints, int n,
               const SolverConfig& cfg, const ExactRiskProvider& provider) {
    cfg.validate();
    GdResult out{d0, {}};
    std::vector<double> grad(d0.beta.size());
    lp::LpProblem prob = lp::LpProblem::from_grid(std::vector<double>(grid.size(), 0.0),
                                                  constraints, grid);
    for (int t = 1; t <= cfg.iterations; ++t) {
        prob.objective = exact_risk_row(provider, out.params, grid, n);
        const lp::LpSolution sol = lp::solve_least_favorable(prob);
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (sol.weights[i] > 0.0)
                provider.add_risk_grad(out.params, grid[i], n, sol.weights[i], grad);
        kernels::axpy(-cfg.eta, grad.data(), out.params.beta.data(), out.params.beta.size());
        check_finite(out.params.beta);
        if (t % cfg.trace_cadence == 0 || t == cfg.iterations)
            out.trace.points.push_back({t, sol.value, 0.0, 0.0, false});
        if (t == cfg.iterations) out.last_prior = sol.weights;
    }
    return out;
}

GdResult sgdmax_convenient(const nets::EstimatorParams& d0, const core::Grid& grid,
                           const std::vector<core::MomentConstraint>& constraints,
                           const core::Functional& target, int n, const SolverConfig& cfg,
                           std::uint64_t master_seed, int threads,
                           const ExactRiskProvider* exact) {
    cfg.validate();
    if (cfg.exact_max_oracle && exact != nullptr)
        return gdmax(d0, grid, constraints, n, cfg, *exact);

    GdResult out{d0, {}};
    std::vector<double> grad(d0.beta.size());
    std::vector<double> risks(grid.size());
    lp::LpProblem prob =
        lp::LpProblem::from_grid(std::vector<double>(grid.size(), 0.0), constraints, grid);

    for (int t = 1; t <= cfg.iterations; ++t) {
        // Stochastic maximization: LP on J'-draw risk estimates.
        if (cfg.exact_max_oracle) {
            for (std::size_t i = 0; i < grid.size(); ++i)
                risks[i] = exact->risk(out.params, grid[i], n);
        } else {
            const auto& params = out.params;
            risk::parallel_for(grid.size(), threads, [&](std::size_t i) {
                double acc = 0.0;
                for (int j = 0; j < cfg.batch_jprime; ++j) {
                    rng::Stream stream = rng::derive(master_seed, rng::Stage::solver_max,
                                                     static_cast<std::uint64_t>(t), i,
                                                     static_cast<std::uint64_t>(j));
                    const risk::Draw draw = risk::draw_observation(grid[i], target, n, stream);
                    const double err = nets::forward(params, draw.obs) - draw.target;
                    acc += err * err;
                }
                risks[i] = acc / cfg.batch_jprime;
            });
        }
        prob.objective = risks;
        const lp::LpSolution sol = lp::solve_least_favorable(prob);

        // Independent batch for the stochastic gradient step.
        std::fill(grad.begin(), grad.end(), 0.0);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double w = sol.weights[i];
            if (w <= 0.0) continue;
            for (int j = 0; j < cfg.batch_j; ++j) {
                rng::Stream stream = rng::derive(master_seed, rng::Stage::solver_grad,
                                                 static_cast<std::uint64_t>(t), i,
                                                 static_cast<std::uint64_t>(j));
                const risk::Draw draw = risk::draw_observation(grid[i], target, n, stream);
                const auto g = nets::grad_loss(out.params, draw.obs, draw.target);
                kernels::axpy(w / cfg.batch_j, g.data(), grad.data(), grad.size());
            }
        }
        kernels::axpy(-cfg.eta, grad.data(), out.params.beta.data(), out.params.beta.size());
        check_finite(out.params.beta);
        if (t % cfg.trace_cadence == 0 || t == cfg.iterations)
            out.trace.points.push_back({t, sol.value, 0.0, 0.0, false});
        if (t == cfg.iterations) out.last_prior = sol.weights;
    }
    return out;
}

GdResult sgdmax(const nets::EstimatorParams& d0, const core::Grid& grid,
                const std::vector<core::MomentConstraint>& constraints,
                const core::Functional& target, int n, const SolverConfig& cfg,
                std::uint64_t master_seed, int threads, const ExactRiskProvider* exact) {
    // The abstract stochastic maximization step is realized by the LP on
    // J'-sample estimated risks.
    return sgdmax_convenient(d0, grid, constraints, target, n, cfg, master_seed, threads, exact);
}

nets::EstimatorParams affine_best_response(const core::Grid& grid,
                                           const std::vector<double>& prior, int n) {
    if (prior.size() != grid.size()) throw GridMismatch("best response: prior length mismatch");
    double a = 0.0, b = 0.0, w = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double p = prior[i];
        if (p == 0.0) continue;
        const double psi = grid[i].mean();
        a += p * psi;
        b += p * psi * psi;
        w += p * grid[i].variance() / n;
    }
    const double s = b - a * a;
    nets::EstimatorParams d = nets::initialize(nets::Architecture::affine_mean(), 0);
    if (s + w < 1e-12) {
        d.beta = {a, 0.0};  // degenerate prior: constant at the prior mean
    } else {
        const double b1 = s / (s + w);
        d.beta = {(1.0 - b1) * a, b1};
    }
    return d;
}

FictitiousResult fictitious_play(const nets::MixtureEstimator& mix0,
                                 const core::PriorWeights& pi0, const core::Grid& grid,
                                 const std::vector<core::MomentConstraint>& constraints, int n,
                                 int iterations, const ExactRiskProvider& provider,
                                 const BestResponse& best_response, bool respond_to_latest,
                                 int trace_cadence) {
    if (iterations < 1) throw InvalidArgument("fictitious play: iterations must be >= 1");
    mix0.validate();
    if (pi0.grid_id != grid.id() || pi0.weights.size() != grid.size())
        throw GridMismatch("fictitious play: initial prior grid mismatch");

    FictitiousResult out;
    out.mixture = mix0;
    out.min_gap = std::numeric_limits<double>::infinity();

    // Mixture risk vector r(mix_t, .) maintained as a running average; the
    // per-member rows are memoized implicitly by folding them in once.
    std::vector<double> mix_risks(grid.size(), 0.0);
    for (const auto& [member, weight] : mix0.members) {
        const auto row = exact_risk_row(provider, member, grid, n);
        kernels::axpy(weight, row.data(), mix_risks.data(), mix_risks.size());
    }
    std::vector<double> pi_avg = pi0.weights;

    lp::LpProblem prob = lp::LpProblem::from_grid(mix_risks, constraints, grid);

    for (int t = 1; t <= iterations; ++t) {
        // Adversary best response against the mixture so far.
        prob.objective = mix_risks;
        const lp::LpSolution adv = lp::solve_least_favorable(prob);
        const double upper = adv.value;

        // Estimator best response against the averaged prior.
        const double tt = static_cast<double>(t);
        std::vector<double> respond_to = pi_avg;
        if (respond_to_latest) {
            for (std::size_t i = 0; i < grid.size(); ++i)
                respond_to[i] = ((tt - 1.0) * pi_avg[i] + adv.weights[i]) / tt;
        }
        const nets::EstimatorParams d_best = best_response(grid, respond_to);
        const auto d_row = exact_risk_row(provider, d_best, grid, n);
        const double lower = kernels::dot(d_row.data(), respond_to.data(), grid.size());

        // Running averages for both players (Algorithm lines 4 and 6).
        for (std::size_t i = 0; i < grid.size(); ++i)
            pi_avg[i] = ((tt - 1.0) * pi_avg[i] + adv.weights[i]) / tt;
        for (auto& [member, weight] : out.mixture.members) weight *= (tt - 1.0) / tt;
        out.mixture.members.emplace_back(d_best, 1.0 / tt);
        for (std::size_t i = 0; i < grid.size(); ++i)
            mix_risks[i] = ((tt - 1.0) * mix_risks[i] + d_row[i]) / tt;

        const double gap = upper - lower;
        if (gap < out.min_gap) out.min_gap = gap;
        if (t % trace_cadence == 0 || t == iterations || t == 1) {
            TracePoint pt;
            pt.iteration = t;
            pt.bayes_risk = kernels::dot(mix_risks.data(), pi_avg.data(), grid.size());
            pt.lower = lower;
            pt.upper = upper;
            pt.has_bounds = true;
            out.trace.points.push_back(pt);
        }
    }

    out.prior = core::PriorWeights::validated(grid, pi_avg, constraints);
    return out;
}

AffineMinimax affine_minimax_exact(const core::Grid& grid, double mu, int n) {
    if (grid.empty()) throw InvalidArgument("affine_minimax_exact: empty grid");

    // Feasible prior-moment pairs (S, W): S = E_pi[psi^2] - mu^2 subject to
    // E_pi[psi] = mu, W = E_pi[Var]/n. The saddle value of the affine family
    // is h(S, W) = S W / (S + W), concave and increasing in both, so the
    // optimum sits on the Pareto frontier of the (S, W) polygon.
    std::vector<double> psi2(grid.size()), vbar(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double psi = grid[i].mean();
        psi2[i] = psi * psi;
        vbar[i] = grid[i].variance() / n;
    }
    auto [up, lo] = core::MomentConstraint::equality(core::Functional::mean(), mu);
    const std::vector<core::MomentConstraint> constraints{up, lo};

    struct Vertex {
        double s, w;
        std::vector<double> pi;
    };

    lp::LpProblem prob =
        lp::LpProblem::from_grid(std::vector<double>(grid.size(), 0.0), constraints, grid);
    const auto solve_dir = [&](double cs, double cw) {
        prob.objective.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
            prob.objective[i] = cs * psi2[i] + cw * vbar[i];
        lp::LpSolution sol = lp::solve_least_favorable(prob);
        Vertex v;
        v.s = kernels::dot(psi2.data(), sol.weights.data(), grid.size()) - mu * mu;
        v.w = kernels::dot(vbar.data(), sol.weights.data(), grid.size());
        v.pi = std::move(sol.weights);
        return v;
    };

    std::vector<Vertex> frontier;
    const auto expand = [&](auto&& self, const Vertex& a, const Vertex& c, int depth) -> void {
        if (depth > 60) return;
        const double ns = c.w - a.w;
        const double nw = a.s - c.s;
        if (std::fabs(ns) < 1e-15 && std::fabs(nw) < 1e-15) return;
        const Vertex m = solve_dir(ns, nw);
        const double beyond = ns * (m.s - a.s) + nw * (m.w - a.w);
        if (beyond > 1e-13 * (1.0 + std::fabs(ns * a.s + nw * a.w))) {
            self(self, a, m, depth + 1);
            frontier.push_back(m);
            self(self, m, c, depth + 1);
        }
    };

    const Vertex vs = solve_dir(1.0, 0.0);
    const Vertex vw = solve_dir(0.0, 1.0);
    frontier.push_back(vs);
    expand(expand, vs, vw, 0);
    frontier.push_back(vw);

    const auto h = [](double s, double w) {
        const double den = s + w;
        return den > 0.0 ? s * w / den : 0.0;
    };

    double best_val = -1.0, best_s = 0.0, best_w = 0.0;
    std::vector<double> best_pi;
    const auto consider = [&](double s, double w, std::vector<double> pi) {
        const double val = h(s, w);
        if (val > best_val) {
            best_val = val;
            best_s = s;
            best_w = w;
            best_pi = std::move(pi);
        }
    };

    for (const auto& v : frontier) consider(v.s, v.w, v.pi);
    for (std::size_t e = 0; e + 1 < frontier.size(); ++e) {
        const Vertex& a = frontier[e];
        const Vertex& c = frontier[e + 1];
        const double ds = c.s - a.s, dw = c.w - a.w;
        // Interior stationary point of h along the edge: dS W^2 + dW S^2 = 0
        // has a solution with S, W > 0 only when dS and dW have opposite
        // signs, at W/S = sqrt(-dW/dS).
        if (ds * dw < 0.0) {
            const double ratio = std::sqrt(-dw / ds);
            const double denom = dw - ratio * ds;
            if (std::fabs(denom) > 1e-300) {
                const double alpha = (ratio * a.s - a.w) / denom;
                if (alpha > 0.0 && alpha < 1.0) {
                    const double s = a.s + alpha * ds;
                    const double w = a.w + alpha * dw;
                    std::vector<double> pi(grid.size());
                    for (std::size_t i = 0; i < grid.size(); ++i)
                        pi[i] = (1.0 - alpha) * a.pi[i] + alpha * c.pi[i];
                    consider(s, w, std::move(pi));
                }
            }
        }
    }

    AffineMinimax out;
    out.value = best_val;
    const double den = best_s + best_w;
    if (den < 1e-12) {
        out.b1 = 0.0;
        out.b0 = mu;
        out.value = 0.0;
    } else {
        out.b1 = best_s / den;
        out.b0 = (1.0 - out.b1) * mu;
    }
    out.prior = std::move(best_pi);
    return out;
}

}  // namespace gmx::solvers
