#include "gmx/nets.hpp"

#include <algorithm>
#include <cmath>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"
#include "gmx/rng.hpp"

namespace gmx::nets {

namespace {

double relu(double z) { return z > 0.0 ? z : 0.0; }
double relu_grad(double z) { return z > 0.0 ? 1.0 : 0.0; }

double sample_mean_of(const core::Observation& x) {
    const auto& v = x.values();
    if (v.empty()) throw InvalidArgument("sample mean of empty sample");
    return kernels::sum(v.data(), v.size()) / static_cast<double>(v.size());
}

double plugin_miller_madow(const core::Observation& x, int n) {
    if (n < 1) throw InvalidArgument("plugin_mm: n < 1");
    const auto& counts = x.raw_counts();
    double h = 0.0;
    for (std::int64_t c : counts) {
        const double q = static_cast<double>(c) / n;
        h -= q * std::log(q);
    }
    return h + (static_cast<double>(counts.size()) - 1.0) / (2.0 * n);
}

double chao_new_categories(const core::Observation& x, int n, int m) {
    const auto& f = x.fingerprint();
    const double f1 = f.empty() ? 0.0 : static_cast<double>(f[0]);
    const double f2 = f.size() > 1 ? static_cast<double>(f[1]) : 0.0;
    if (f1 <= 0.0) return 0.0;
    const double f0 = f2 > 0.0 ? f1 * f1 / (2.0 * f2) : f1 * (f1 - 1.0) / 2.0;
    if (f0 <= 0.0) return 0.0;
    return f0 * (1.0 - std::pow(1.0 - f1 / (n * f0 + f1), m));
}

double smoothed_good_toulmin(const core::Observation& x, int n, int m) {
    const auto& f = x.fingerprint();
    const double t = static_cast<double>(m) / n;
    if (m <= n) {
        // Plain Good-Toulmin: the alternating series is stable here.
        double est = 0.0, tj = 1.0;
        for (std::size_t j = 0; j < f.size(); ++j) {
            tj *= -t;
            est -= tj * static_cast<double>(f[j]);
        }
        return est;
    }
    // Binomial smoothing: weight term j by P(L >= j) with
    // L ~ Bin(q, 1/(1+t)), q = floor(log2(n t^2/(t-1)) / 2) (at least 1).
    const int q = std::max(1, static_cast<int>(std::floor(0.5 * std::log2(n * t * t / (t - 1.0)))));
    const double s = 1.0 / (1.0 + t);
    std::vector<double> pmf(static_cast<std::size_t>(q) + 1);
    for (int k = 0; k <= q; ++k) {
        double logp = std::lgamma(q + 1.0) - std::lgamma(k + 1.0) - std::lgamma(q - k + 1.0) +
                      k * std::log(s) + (q - k) * std::log1p(-s);
        pmf[static_cast<std::size_t>(k)] = std::exp(logp);
    }
    double est = 0.0, tj = 1.0;
    for (int j = 1; j <= q && j <= static_cast<int>(f.size()); ++j) {
        tj *= -t;
        double tail = 0.0;
        for (int k = j; k <= q; ++k) tail += pmf[static_cast<std::size_t>(k)];
        est -= tj * tail * static_cast<double>(f[static_cast<std::size_t>(j - 1)]);
    }
    return est;
}

}  // namespace

BaselineKind baseline_from_name(const std::string& name) {
    if (name == "sample_mean") return BaselineKind::sample_mean;
    if (name == "plugin_mm") return BaselineKind::plugin_mm;
    if (name == "chao_new_categories") return BaselineKind::chao_new_categories;
    if (name == "smoothed_gt_new_categories") return BaselineKind::smoothed_gt_new_categories;
    throw InvalidArgument("unknown baseline: " + name);
}

std::string baseline_name(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::sample_mean:
            return "sample_mean";
        case BaselineKind::plugin_mm:
            return "plugin_mm";
        case BaselineKind::chao_new_categories:
            return "chao_new_categories";
        case BaselineKind::smoothed_gt_new_categories:
            return "smoothed_gt_new_categories";
    }
    return "?";
}

double baseline(BaselineKind kind, const core::Observation& x, int n, int m) {
    if (n < 1) throw InvalidArgument("baseline: n < 1");
    switch (kind) {
        case BaselineKind::sample_mean:
            return sample_mean_of(x);
        case BaselineKind::plugin_mm:
            return plugin_miller_madow(x, n);
        case BaselineKind::chao_new_categories:
            return chao_new_categories(x, n, m);
        case BaselineKind::smoothed_gt_new_categories:
            return smoothed_good_toulmin(x, n, m);
    }
    throw InvalidArgument("baseline: unknown kind");
}

Architecture Architecture::affine_mean() {
    Architecture a;
    a.family_ = Family::affine_mean;
    return a;
}

Architecture Architecture::skn(int n, int m, std::vector<BaselineKind> baselines,
                               std::vector<double> init_weights, int hidden) {
    if (n < 1 || hidden < 1) throw InvalidArgument("skn: need n >= 1 and hidden >= 1");
    if (baselines.empty() || baselines.size() != init_weights.size())
        throw InvalidArgument("skn: baselines and init weights must match and be nonempty");
    Architecture a;
    a.family_ = Family::skn;
    a.n_ = n;
    a.m_ = m;
    a.hidden_ = hidden;
    a.input_dim_ = n;
    a.baselines_ = std::move(baselines);
    a.init_weights_ = std::move(init_weights);
    return a;
}

Architecture Architecture::deepset_skn(int n, int phi1, int phi2, int rho1) {
    if (n < 1 || phi1 < 1 || phi2 < 1 || rho1 < 1) throw InvalidArgument("deepset: bad widths");
    Architecture a;
    a.family_ = Family::deepset_skn;
    a.n_ = n;
    a.input_dim_ = n;
    a.phi1_ = phi1;
    a.phi2_ = phi2;
    a.rho1_ = rho1;
    return a;
}

Architecture Architecture::elm(ElmInput input, int input_dim, int hidden,
                               std::uint64_t frozen_seed, int n, int m) {
    if (input_dim < 1 || hidden < 1) throw InvalidArgument("elm: bad dimensions");
    Architecture a;
    a.family_ = Family::elm;
    a.elm_input_ = input;
    a.input_dim_ = input_dim;
    a.hidden_ = hidden;
    a.frozen_seed_ = frozen_seed;
    a.n_ = n;
    a.m_ = m;
    // Frozen hidden layer, reproducible from the seed: weights then biases.
    auto frozen = std::make_shared<std::vector<double>>();
    frozen->reserve(static_cast<std::size_t>(hidden) * (input_dim + 1));
    rng::Stream stream = rng::derive(frozen_seed, rng::Stage::init);
    const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim));
    for (int i = 0; i < hidden * (input_dim + 1); ++i)
        frozen->push_back(stream.next_uniform(-scale, scale));
    a.frozen_ = std::move(frozen);
    return a;
}

const std::vector<double>& Architecture::frozen_weights() const {
    if (family_ != Family::elm || !frozen_) throw InvalidArgument("frozen_weights: not an elm");
    return *frozen_;
}

std::size_t Architecture::param_count() const {
    switch (family_) {
        case Family::affine_mean:
            return 2;
        case Family::skn: {
            const std::size_t h = static_cast<std::size_t>(hidden_);
            const std::size_t in = static_cast<std::size_t>(input_dim_) + baselines_.size();
            return h * in + h + (h + baselines_.size()) + 1 + (baselines_.size() + 1) + 1;
        }
        case Family::deepset_skn: {
            const std::size_t p1 = static_cast<std::size_t>(phi1_);
            const std::size_t p2 = static_cast<std::size_t>(phi2_);
            const std::size_t r1 = static_cast<std::size_t>(rho1_);
            return p1 + p1 + p2 * p1 + p2 + r1 * (p2 + 1) + r1 + (r1 + 1) + 1 + 2 + 1;
        }
        case Family::elm:
            return static_cast<std::size_t>(hidden_) + 1;
    }
    return 0;
}

std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> Architecture::layout()
    const {
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> out;
    std::size_t off = 0;
    const auto push = [&](const std::string& name, std::size_t len) {
        out.emplace_back(name, std::make_pair(off, len));
        off += len;
    };
    switch (family_) {
        case Family::affine_mean:
            push("bias", 1);
            push("mean_weight", 1);
            break;
        case Family::skn: {
            const std::size_t h = static_cast<std::size_t>(hidden_);
            const std::size_t b = baselines_.size();
            const std::size_t in = static_cast<std::size_t>(input_dim_) + b;
            push("w1", h * in);
            push("b1", h);
            push("w2", h + b);
            push("b2", 1);
            push("w_out", b + 1);
            push("b_out", 1);
            break;
        }
        case Family::deepset_skn: {
            const std::size_t p1 = static_cast<std::size_t>(phi1_);
            const std::size_t p2 = static_cast<std::size_t>(phi2_);
            const std::size_t r1 = static_cast<std::size_t>(rho1_);
            push("w1", p1);
            push("b1", p1);
            push("w2", p2 * p1);
            push("b2", p2);
            push("w3", r1 * (p2 + 1));
            push("b3", r1);
            push("w4", r1 + 1);
            push("b4", 1);
            push("w_out", 2);
            push("b_out", 1);
            break;
        }
        case Family::elm:
            push("v_out", static_cast<std::size_t>(hidden_));
            push("b_out", 1);
            break;
    }
    return out;
}

bool Architecture::operator==(const Architecture& other) const {
    return family_ == other.family_ && n_ == other.n_ && m_ == other.m_ &&
           hidden_ == other.hidden_ && phi1_ == other.phi1_ && phi2_ == other.phi2_ &&
           rho1_ == other.rho1_ && input_dim_ == other.input_dim_ &&
           elm_input_ == other.elm_input_ && frozen_seed_ == other.frozen_seed_ &&
           baselines_ == other.baselines_ && init_weights_ == other.init_weights_;
}

EstimatorParams initialize(const Architecture& arch, std::uint64_t seed) {
    EstimatorParams d;
    d.arch = arch;
    d.init_seed = seed;
    d.beta.assign(arch.param_count(), 0.0);
    rng::Stream stream = rng::derive(seed, rng::Stage::init, 1);
    const auto layout = arch.layout();
    const auto fill_uniform = [&](const std::string& name, double scale) {
        for (const auto& [nm, slice] : layout) {
            if (nm != name) continue;
            for (std::size_t i = 0; i < slice.second; ++i)
                d.beta[slice.first + i] = stream.next_uniform(-scale, scale);
            return;
        }
        throw InvalidArgument("initialize: missing slice " + name);
    };
    switch (arch.family()) {
        case Architecture::Family::affine_mean:
            d.beta = {0.0, 1.0};  // the sample mean
            break;
        case Architecture::Family::skn: {
            const std::size_t b = arch.baselines().size();
            fill_uniform("w1", 1.0 / std::sqrt(static_cast<double>(arch.input_dim()) + b));
            fill_uniform("w2", 1.0 / std::sqrt(static_cast<double>(arch.hidden()) + b));
            // Output reproduces the designated baseline combination: the
            // network path enters with weight zero.
            for (const auto& [nm, slice] : layout) {
                if (nm != "w_out") continue;
                for (std::size_t i = 0; i < b; ++i)
                    d.beta[slice.first + i] = arch.init_baseline_weights()[i];
            }
            break;
        }
        case Architecture::Family::deepset_skn: {
            fill_uniform("w1", 1.0);
            fill_uniform("w2", 1.0 / std::sqrt(static_cast<double>(arch.phi1())));
            fill_uniform("w3", 1.0 / std::sqrt(static_cast<double>(arch.phi2()) + 1.0));
            fill_uniform("w4", 1.0 / std::sqrt(static_cast<double>(arch.rho1()) + 1.0));
            // Output = 1 * sample mean exactly.
            for (const auto& [nm, slice] : layout)
                if (nm == "w_out") d.beta[slice.first] = 1.0;
            break;
        }
        case Architecture::Family::elm:
            break;  // trainable slice starts at zero
    }
    return d;
}

namespace {

struct SknScratch {
    std::vector<double> input, h1, base;
};

struct DeepSetScratch {
    std::vector<double> x;       // sorted copy
    std::vector<double> z1, h1;  // n x phi1
    std::vector<double> z2, h2;  // n x phi2
    std::vector<double> pooled;  // phi2
    std::vector<double> z3, h3;  // rho1
};

thread_local SknScratch tl_skn;
thread_local DeepSetScratch tl_ds;

void elm_input_vector(const Architecture& arch, const core::Observation& x,
                      std::vector<double>& in) {
    in.clear();
    if (arch.elm_input() == ElmInput::real_sample) {
        const auto& v = x.values();
        in.assign(v.begin(), v.end());
    } else {
        const auto& f = x.fingerprint();
        in.reserve(f.size());
        for (std::int64_t c : f) in.push_back(static_cast<double>(c));
    }
    if (in.size() != static_cast<std::size_t>(arch.input_dim()))
        throw VariantMismatch("elm: observation size does not match input_dim");
}

// Shared SKN forward: fills scratch, returns (out, z2, h2).
struct SknForward {
    double out, z2, h2;
};

SknForward skn_forward(const EstimatorParams& d, const core::Observation& x, SknScratch& s) {
    const Architecture& a = d.arch;
    const auto& f = x.fingerprint();
    if (f.size() != static_cast<std::size_t>(a.input_dim()))
        throw VariantMismatch("skn: fingerprint length does not match architecture");
    const std::size_t h = static_cast<std::size_t>(a.hidden());
    const std::size_t b = a.baselines().size();
    const std::size_t in_dim = f.size() + b;

    s.base.resize(b);
    for (std::size_t i = 0; i < b; ++i)
        s.base[i] = baseline(a.baselines()[i], x, a.sample_size(), a.future_size());

    s.input.resize(in_dim);
    for (std::size_t j = 0; j < f.size(); ++j) s.input[j] = static_cast<double>(f[j]);
    for (std::size_t i = 0; i < b; ++i) s.input[f.size() + i] = s.base[i];

    const double* w1 = d.beta.data();
    const double* b1 = w1 + h * in_dim;
    const double* w2 = b1 + h;
    const double* b2 = w2 + (h + b);
    const double* wout = b2 + 1;
    const double* bout = wout + (b + 1);

    s.h1.resize(h);
    for (std::size_t i = 0; i < h; ++i)
        s.h1[i] = relu(kernels::dot(w1 + i * in_dim, s.input.data(), in_dim) + b1[i]);

    double z2 = kernels::dot(w2, s.h1.data(), h) + b2[0];
    for (std::size_t i = 0; i < b; ++i) z2 += w2[h + i] * s.base[i];
    const double h2 = relu(z2);

    double out = wout[b] * h2 + bout[0];
    for (std::size_t i = 0; i < b; ++i) out += wout[i] * s.base[i];
    return {out, z2, h2};
}

struct DeepSetForward {
    double out, mean, z4, h4;
};

DeepSetForward deepset_forward(const EstimatorParams& d, const core::Observation& x,
                               DeepSetScratch& s) {
    const Architecture& a = d.arch;
    const auto& raw = x.values();
    if (raw.empty()) throw VariantMismatch("deepset: empty sample");
    const std::size_t n = raw.size();
    const std::size_t p1 = static_cast<std::size_t>(a.phi1());
    const std::size_t p2 = static_cast<std::size_t>(a.phi2());
    const std::size_t r1 = static_cast<std::size_t>(a.rho1());

    // Canonical input order: exact permutation invariance, including the
    // floating-point rounding of the pooled sums.
    s.x.assign(raw.begin(), raw.end());
    std::sort(s.x.begin(), s.x.end());
    const double mean = kernels::sum(s.x.data(), n) / static_cast<double>(n);

    const double* w1 = d.beta.data();
    const double* b1 = w1 + p1;
    const double* w2 = b1 + p1;
    const double* b2 = w2 + p2 * p1;
    const double* w3 = b2 + p2;
    const double* b3 = w3 + r1 * (p2 + 1);
    const double* w4 = b3 + r1;
    const double* b4 = w4 + (r1 + 1);
    const double* wout = b4 + 1;
    const double* bout = wout + 2;

    s.z1.resize(n * p1);
    s.h1.resize(n * p1);
    s.z2.resize(n * p2);
    s.h2.resize(n * p2);
    s.pooled.assign(p2, 0.0);
    for (std::size_t e = 0; e < n; ++e) {
        double* z1 = s.z1.data() + e * p1;
        double* h1 = s.h1.data() + e * p1;
        for (std::size_t i = 0; i < p1; ++i) {
            z1[i] = w1[i] * s.x[e] + b1[i];
            h1[i] = relu(z1[i]);
        }
        double* z2 = s.z2.data() + e * p2;
        double* h2 = s.h2.data() + e * p2;
        for (std::size_t k = 0; k < p2; ++k) {
            z2[k] = kernels::dot(w2 + k * p1, h1, p1) + b2[k];
            h2[k] = relu(z2[k]);
            s.pooled[k] += h2[k];
        }
    }

    s.z3.resize(r1);
    s.h3.resize(r1);
    for (std::size_t i = 0; i < r1; ++i) {
        const double* row = w3 + i * (p2 + 1);
        s.z3[i] = kernels::dot(row, s.pooled.data(), p2) + row[p2] * mean + b3[i];
        s.h3[i] = relu(s.z3[i]);
    }

    double z4 = kernels::dot(w4, s.h3.data(), r1) + w4[r1] * mean + b4[0];
    const double h4 = relu(z4);
    const double out = wout[0] * mean + wout[1] * h4 + bout[0];
    return {out, mean, z4, h4};
}

double elm_forward(const EstimatorParams& d, const core::Observation& x, std::vector<double>& h) {
    const Architecture& a = d.arch;
    thread_local std::vector<double> in;
    elm_input_vector(a, x, in);
    const std::size_t hid = static_cast<std::size_t>(a.hidden());
    const std::size_t dim = static_cast<std::size_t>(a.input_dim());
    const double* w = a.frozen_weights().data();
    const double* bias = w + hid * dim;
    h.resize(hid);
    for (std::size_t i = 0; i < hid; ++i)
        h[i] = relu(kernels::dot(w + i * dim, in.data(), dim) + bias[i]);
    return kernels::dot(d.beta.data(), h.data(), hid) + d.beta[hid];
}

}  // namespace

double forward(const EstimatorParams& d, const core::Observation& x) {
    if (d.beta.size() != d.arch.param_count())
        throw InvalidArgument("forward: coefficient length does not match architecture");
    double out = 0.0;
    switch (d.arch.family()) {
        case Architecture::Family::affine_mean:
            out = d.beta[0] + d.beta[1] * sample_mean_of(x);
            break;
        case Architecture::Family::skn:
            out = skn_forward(d, x, tl_skn).out;
            break;
        case Architecture::Family::deepset_skn:
            out = deepset_forward(d, x, tl_ds).out;
            break;
        case Architecture::Family::elm: {
            thread_local std::vector<double> h;
            out = elm_forward(d, x, h);
            break;
        }
    }
    if (!std::isfinite(out)) throw Error("forward: non-finite activation");
    return out;
}

std::vector<double> grad_loss(const EstimatorParams& d, const core::Observation& x,
                              double target) {
    std::vector<double> g(d.beta.size(), 0.0);
    switch (d.arch.family()) {
        case Architecture::Family::affine_mean: {
            const double xbar = sample_mean_of(x);
            const double r2 = 2.0 * (d.beta[0] + d.beta[1] * xbar - target);
            g[0] = r2;
            g[1] = r2 * xbar;
            break;
        }
        case Architecture::Family::skn: {
            SknScratch& s = tl_skn;
            const SknForward fw = skn_forward(d, x, s);
            const double r2 = 2.0 * (fw.out - target);
            const std::size_t h = static_cast<std::size_t>(d.arch.hidden());
            const std::size_t b = d.arch.baselines().size();
            const std::size_t in_dim = s.input.size();
            const double* w1 = d.beta.data();
            const double* w2 = w1 + h * in_dim + h;
            double* g_w1 = g.data();
            double* g_b1 = g_w1 + h * in_dim;
            double* g_w2 = g_b1 + h;
            double* g_b2 = g_w2 + (h + b);
            double* g_wout = g_b2 + 1;
            double* g_bout = g_wout + (b + 1);

            for (std::size_t i = 0; i < b; ++i) g_wout[i] = r2 * s.base[i];
            g_wout[b] = r2 * fw.h2;
            g_bout[0] = r2;

            const double dz2 = r2 * d.beta[h * in_dim + h + (h + b) + 1 + b] * relu_grad(fw.z2);
            if (dz2 != 0.0) {
                for (std::size_t i = 0; i < h; ++i) g_w2[i] = dz2 * s.h1[i];
                for (std::size_t i = 0; i < b; ++i) g_w2[h + i] = dz2 * s.base[i];
                g_b2[0] = dz2;
                for (std::size_t i = 0; i < h; ++i) {
                    if (s.h1[i] <= 0.0) continue;  // relu_grad(z1) = 0
                    const double dz1 = dz2 * w2[i];
                    if (dz1 == 0.0) continue;
                    kernels::axpy(dz1, s.input.data(), g_w1 + i * in_dim, in_dim);
                    g_b1[i] = dz1;
                }
            }
            break;
        }
        case Architecture::Family::deepset_skn: {
            DeepSetScratch& s = tl_ds;
            const DeepSetForward fw = deepset_forward(d, x, s);
            const double r2 = 2.0 * (fw.out - target);
            const std::size_t n = s.x.size();
            const std::size_t p1 = static_cast<std::size_t>(d.arch.phi1());
            const std::size_t p2 = static_cast<std::size_t>(d.arch.phi2());
            const std::size_t r1 = static_cast<std::size_t>(d.arch.rho1());
            const double* w2 = d.beta.data() + 2 * p1;
            const double* w3 = w2 + p2 * p1 + p2;
            const double* w4 = w3 + r1 * (p2 + 1) + r1;
            const double* wout = w4 + (r1 + 1) + 1;
            double* g_w1 = g.data();
            double* g_b1 = g_w1 + p1;
            double* g_w2 = g_b1 + p1;
            double* g_b2 = g_w2 + p2 * p1;
            double* g_w3 = g_b2 + p2;
            double* g_b3 = g_w3 + r1 * (p2 + 1);
            double* g_w4 = g_b3 + r1;
            double* g_b4 = g_w4 + (r1 + 1);
            double* g_wout = g_b4 + 1;
            double* g_bout = g_wout + 2;

            g_wout[0] = r2 * fw.mean;
            g_wout[1] = r2 * fw.h4;
            g_bout[0] = r2;

            const double dz4 = r2 * wout[1] * relu_grad(fw.z4);
            if (dz4 != 0.0) {
                for (std::size_t i = 0; i < r1; ++i) g_w4[i] = dz4 * s.h3[i];
                g_w4[r1] = dz4 * fw.mean;
                g_b4[0] = dz4;

                std::vector<double> dpooled(p2, 0.0);
                for (std::size_t i = 0; i < r1; ++i) {
                    const double dz3 = dz4 * w4[i] * relu_grad(s.z3[i]);
                    if (dz3 == 0.0) continue;
                    double* row = g_w3 + i * (p2 + 1);
                    kernels::axpy(dz3, s.pooled.data(), row, p2);
                    row[p2] += dz3 * fw.mean;
                    g_b3[i] = dz3;
                    kernels::axpy(dz3, w3 + i * (p2 + 1), dpooled.data(), p2);
                }

                std::vector<double> dh1(p1);
                for (std::size_t e = 0; e < n; ++e) {
                    const double* z1 = s.z1.data() + e * p1;
                    const double* h1 = s.h1.data() + e * p1;
                    const double* z2 = s.z2.data() + e * p2;
                    std::fill(dh1.begin(), dh1.end(), 0.0);
                    for (std::size_t k = 0; k < p2; ++k) {
                        const double dz2 = dpooled[k] * relu_grad(z2[k]);
                        if (dz2 == 0.0) continue;
                        kernels::axpy(dz2, h1, g_w2 + k * p1, p1);
                        g_b2[k] += dz2;
                        kernels::axpy(dz2, w2 + k * p1, dh1.data(), p1);
                    }
                    for (std::size_t i = 0; i < p1; ++i) {
                        const double dz1 = dh1[i] * relu_grad(z1[i]);
                        if (dz1 == 0.0) continue;
                        g_w1[i] += dz1 * s.x[e];
                        g_b1[i] += dz1;
                    }
                }
            }
            break;
        }
        case Architecture::Family::elm: {
            thread_local std::vector<double> h;
            const double out = elm_forward(d, x, h);
            const double r2 = 2.0 * (out - target);
            const std::size_t hid = static_cast<std::size_t>(d.arch.hidden());
            for (std::size_t i = 0; i < hid; ++i) g[i] = r2 * h[i];
            g[hid] = r2;
            break;
        }
    }
    return g;
}

void MixtureEstimator::validate() const {
    if (members.empty()) throw InvalidArgument("mixture: no members");
    double total = 0.0;
    for (const auto& [params, w] : members) {
        if (!(w >= 0.0)) throw InvalidArgument("mixture: negative weight");
        if (params.arch != members.front().first.arch)
            throw InvalidArgument("mixture: heterogeneous architectures");
        total += w;
    }
    if (std::fabs(total - 1.0) > 1e-12)
        throw InvalidArgument("mixture: weights sum to " + std::to_string(total));
}

EstimatorParams average_mixture(const MixtureEstimator& mix) {
    mix.validate();
    const auto family = mix.members.front().first.arch.family();
    if (family != Architecture::Family::affine_mean && family != Architecture::Family::elm)
        throw InvalidArgument(
            "average_mixture: only affine-in-coefficients families (affine_mean, elm) average");
    EstimatorParams out = mix.members.front().first;
    std::fill(out.beta.begin(), out.beta.end(), 0.0);
    for (const auto& [params, w] : mix.members)
        kernels::axpy(w, params.beta.data(), out.beta.data(), out.beta.size());
    return out;
}

risk::EstimatorFn make_evaluator(EstimatorParams d) {
    auto shared = std::make_shared<EstimatorParams>(std::move(d));
    return [shared](const core::Observation& x) { return forward(*shared, x); };
}

}  // namespace gmx::nets
