#include "gmx/gridgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gmx/errors.hpp"

namespace gmx::gridgen {

namespace {

constexpr double kZ95 = 1.95996;  // central 95% normal quantile
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kBirthULo = 1e-9;

double log_dirichlet_pdf(const std::vector<double>& x, const std::vector<double>& alpha) {
    double lp = 0.0, asum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lp += (alpha[i] - 1.0) * std::log(x[i]) - std::lgamma(alpha[i]);
        asum += alpha[i];
    }
    return lp + std::lgamma(asum);
}

std::uint64_t content_hash(const core::Distribution& p) {
    std::uint64_t h = 0xcbf29ce484222325ULL ^ static_cast<std::uint64_t>(p.kind());
    const auto fold = [&h](const std::vector<double>& v) {
        for (double x : v) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(x));
            std::memcpy(&bits, &x, sizeof(bits));
            h = (h ^ bits) * 0x100000001b3ULL;
        }
    };
    if (p.is_point_support()) {
        fold(p.points());
        fold(p.weights());
    } else {
        fold(p.probs());
    }
    return h;
}

}  // namespace

PseudoPriorComponent PseudoPriorComponent::normal_on(core::Functional f, double mean,
                                                     double interval95_lo, double interval95_hi,
                                                     double weight) {
    if (!(interval95_lo < interval95_hi))
        throw InvalidArgument("pseudo-prior: empty 95% interval");
    PseudoPriorComponent c;
    c.kind = Kind::normal_on_functional;
    c.functional = std::move(f);
    c.mu = mean;
    c.sigma = 0.5 * (interval95_hi - interval95_lo) / kZ95;
    c.weight = weight;
    return c;
}

PseudoPriorComponent PseudoPriorComponent::negbinomial_on_k(double success_prob, int failures,
                                                            double weight) {
    if (!(success_prob > 0.0 && success_prob < 1.0) || failures < 1)
        throw InvalidArgument("pseudo-prior: bad negative-binomial parameters");
    PseudoPriorComponent c;
    c.kind = Kind::negbinomial_on_k;
    c.success_prob = success_prob;
    c.failures = failures;
    c.weight = weight;
    return c;
}

double pseudo_prior_logdensity(const PseudoPrior& tau, const core::Distribution& p) {
    double total = 0.0;
    for (const auto& c : tau.components) {
        if (c.weight == 0.0) continue;
        double logf = 0.0;
        if (c.kind == PseudoPriorComponent::Kind::normal_on_functional) {
            const double x = core::eval_functional(c.functional, p);
            const double z = (x - c.mu) / c.sigma;
            logf = -0.5 * z * z - std::log(c.sigma * std::sqrt(kTwoPi));
        } else {
            const double k = static_cast<double>(p.category_count());
            const double q = c.success_prob;
            const double r = c.failures;
            logf = std::lgamma(k + r) - std::lgamma(k + 1.0) - std::lgamma(r) +
                   k * std::log(q) + r * std::log1p(-q);
        }
        if (!std::isfinite(logf)) throw Error("pseudo-prior: non-finite log-density");
        total += c.weight * logf;
    }
    return total;
}

void McmcConfig::validate() const {
    if (iterations < 1) throw InvalidArgument("mcmc: iterations must be >= 1");
    if (std::fabs(p_perturb + p_birth + p_death - 1.0) > 1e-9)
        throw InvalidArgument("mcmc: proposal mix must sum to 1");
    if (p_perturb < 0.0 || p_birth < 0.0 || p_death < 0.0)
        throw InvalidArgument("mcmc: negative proposal probability");
    if (!(birth_mass > 0.0 && birth_mass < 0.5))
        throw InvalidArgument("mcmc: birth mass must lie in (0, 0.5)");
    if (!(dirichlet_alpha > 0.0)) throw InvalidArgument("mcmc: dirichlet alpha must be positive");
    if (start_categories < 1) throw InvalidArgument("mcmc: start_categories must be >= 1");
}

MultinomialKernel::MultinomialKernel(const McmcConfig& cfg) : cfg_(cfg) { cfg.validate(); }

Proposal MultinomialKernel::propose(const core::Distribution& current, rng::Stream& rng) const {
    const auto& p = current.probs();
    const std::size_t k = p.size();
    const double eps = cfg_.birth_mass;
    const double log_fu = -std::log1p(-kBirthULo);  // uniform density on (lo, 1)

    double pick = rng.next_unit();
    if (pick < cfg_.p_perturb || (k < 2 && pick >= cfg_.p_perturb + cfg_.p_birth)) {
        // Dirichlet(alpha * p) perturbation; dimension unchanged.
        std::vector<double> alpha(k), draw(k);
        double total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            alpha[i] = cfg_.dirichlet_alpha * p[i];
            draw[i] = rng.next_gamma(alpha[i]);
            total += draw[i];
        }
        for (std::size_t i = 0; i < k; ++i) {
            draw[i] /= total;
            if (!(draw[i] > 1e-100)) {
                Proposal out(current);  // numerically on the simplex boundary
                out.type = "perturb";
                out.valid = false;
                return out;
            }
        }
        std::vector<double> alpha_rev(k);
        for (std::size_t i = 0; i < k; ++i) alpha_rev[i] = cfg_.dirichlet_alpha * draw[i];
        const double log_fwd = log_dirichlet_pdf(draw, alpha);
        Proposal out(core::Distribution::multinomial(std::move(draw)));
        out.type = "perturb";
        out.log_fwd = std::log(cfg_.p_perturb) + log_fwd;
        out.log_rev = std::log(cfg_.p_perturb) + log_dirichlet_pdf(p, alpha_rev);
        return out;
    }

    if (pick < cfg_.p_perturb + cfg_.p_birth) {
        // Birth: insert mass eps*u at a uniform slot, scale the rest.
        const double u = rng.next_uniform(kBirthULo, 1.0);
        const double mass = eps * u;
        const std::size_t slot = static_cast<std::size_t>(rng.index_below(k + 1));
        std::vector<double> q;
        q.reserve(k + 1);
        for (std::size_t i = 0; i < k; ++i) q.push_back(p[i] * (1.0 - mass));
        q.insert(q.begin() + static_cast<std::ptrdiff_t>(slot), mass);
        // Jacobian of (p, u) -> q is eps * (1-mass)^(k-1).
        const double log_jac = std::log(eps) + (static_cast<double>(k) - 1.0) * std::log1p(-mass);
        Proposal out(core::Distribution::multinomial(std::move(q)));
        out.type = "birth";
        out.log_fwd = std::log(cfg_.p_birth) - std::log(static_cast<double>(k + 1)) + log_fu -
                      log_jac;
        out.log_rev = std::log(cfg_.p_death) - std::log(static_cast<double>(k + 1));
        return out;
    }

    // Death: remove a uniform category, renormalize. Only reversible when
    // the removed mass could have been born (mass < eps).
    const std::size_t slot = static_cast<std::size_t>(rng.index_below(k));
    const double mass = p[slot];
    const double u_rev = mass / eps;
    if (u_rev <= kBirthULo || u_rev >= 1.0) {
        Proposal out(current);
        out.type = "death";
        out.valid = false;
        return out;
    }
    std::vector<double> q;
    q.reserve(k - 1);
    for (std::size_t i = 0; i < k; ++i)
        if (i != slot) q.push_back(p[i] / (1.0 - mass));
    const double log_jac = std::log(eps) + (static_cast<double>(k) - 2.0) * std::log1p(-mass);
    Proposal out(core::Distribution::multinomial(std::move(q)));
    out.type = "death";
    out.log_fwd = std::log(cfg_.p_death) - std::log(static_cast<double>(k));
    out.log_rev = std::log(cfg_.p_birth) - std::log(static_cast<double>(k)) + log_fu - log_jac;
    return out;
}

double McmcDiagnostics::acceptance_rate() const {
    std::int64_t proposed = 0;
    for (const auto& [type, counts] : moves) proposed += counts.first;
    return proposed > 0 ? static_cast<double>(accepted_total) / static_cast<double>(proposed)
                        : 0.0;
}

McmcDiagnostics mcmc_refine(core::Grid& grid, int round,
                            const std::function<double(const core::Distribution&)>& risk_of_state,
                            const PseudoPrior& tau, const McmcConfig& cfg,
                            const core::Distribution* start, const ProposalKernel* kernel) {
    cfg.validate();
    const MultinomialKernel default_kernel(cfg);
    const ProposalKernel& kern = kernel != nullptr ? *kernel : default_kernel;

    const auto log_target = [&](const core::Distribution& p) {
        const double r = risk_of_state(p);
        if (!(r > 0.0) || !std::isfinite(r))
            throw Error("mcmc: risk provider must return strictly positive finite values");
        const double lt = std::log(r) + pseudo_prior_logdensity(tau, p);
        if (!std::isfinite(lt)) throw Error("mcmc: non-finite target log-density");
        return lt;
    };

    core::Distribution state =
        start != nullptr
            ? *start
            : core::Distribution::multinomial(std::vector<double>(
                  static_cast<std::size_t>(cfg.start_categories),
                  1.0 / static_cast<double>(cfg.start_categories)));
    double state_logt = log_target(state);

    rng::Stream chain = rng::derive(cfg.seed, rng::Stage::mcmc_chain);
    McmcDiagnostics diag;
    const std::size_t before = grid.size();

    for (int t = 0; t < cfg.iterations; ++t) {
        Proposal prop = kern.propose(state, chain);
        auto& counts = diag.moves[prop.type];
        ++counts.first;
        if (prop.valid) {
            const double prop_logt = log_target(prop.state);
            const double log_accept = (prop_logt + prop.log_rev) - (state_logt + prop.log_fwd);
            if (std::log(chain.next_open()) < log_accept) {
                state = std::move(prop.state);
                state_logt = prop_logt;
                ++counts.second;
                ++diag.accepted_total;
            }
        }
        grid.add(state, round);
    }

    diag.unique_added = static_cast<std::int64_t>(grid.size() - before);
    diag.all_rejected = diag.accepted_total == 0;
    return diag;
}

std::function<double(const core::Distribution&)> make_deterministic_mc_risk(
    risk::EstimatorFn d, core::Functional target, int n, int reps, std::uint64_t master_seed) {
    return [d = std::move(d), target = std::move(target), n, reps,
            master_seed](const core::Distribution& p) {
        rng::RngSpec spec{rng::derive_seed(master_seed, static_cast<std::uint64_t>(
                                                            rng::Stage::mcmc_target),
                                           content_hash(p)),
                          rng::Stage::mcmc_target, 0};
        return risk::mc_risk(d, target, p, n, reps, spec).value;
    };
}

void structured_mean_grid(core::Grid& grid, int round, const StructuredGridConfig& cfg,
                          std::uint64_t master_seed) {
    rng::Stream stream =
        rng::derive(master_seed, rng::Stage::grid_gen, static_cast<std::uint64_t>(round));
    if (round <= 1) {
        for (int i = 0; i < cfg.initial_count; ++i)
            grid.add(core::Distribution::bernoulli(stream.next_open()), 1);
        grid.add(core::Distribution::bernoulli(0.0), 1);
        grid.add(core::Distribution::bernoulli(1.0), 1);
        return;
    }

    // Existing support points across the grid so far.
    std::vector<double> support;
    for (const auto& p : grid.points())
        for (double x : p.points()) support.push_back(x);
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    const auto random_law = [&](const std::vector<double>& pts) {
        std::vector<double> w(pts.size());
        double total = 0.0;
        for (double& x : w) {
            x = -std::log(stream.next_open());  // flat Dirichlet via exponentials
            total += x;
        }
        for (double& x : w) x /= total;
        return core::Distribution::point_support(pts, std::move(w));
    };

    for (int i = 0; i < cfg.reweight_count; ++i) grid.add(random_law(support), round);

    std::vector<double> extended = support;
    for (int i = 0; i < cfg.fresh_support; ++i) extended.push_back(stream.next_open());
    std::sort(extended.begin(), extended.end());
    extended.erase(std::unique(extended.begin(), extended.end()), extended.end());

    for (int i = 0; i < cfg.fresh_count; ++i) grid.add(random_law(extended), round);
}

}  // namespace gmx::gridgen
