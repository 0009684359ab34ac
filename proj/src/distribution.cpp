#include "gmx/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmx/errors.hpp"
#include "gmx/kernels.hpp"

namespace gmx::core {

namespace {

void build_cdf(const std::vector<double>& w, std::vector<double>& cdf) {
    cdf.resize(w.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += w[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;  // guard against cumulative rounding past 1
}

std::size_t sample_index(const std::vector<double>& cdf, rng::Stream& rng) {
    const double u = rng.next_unit();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return it == cdf.end() ? cdf.size() - 1 : static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace

Distribution Distribution::point_support(std::vector<double> points, std::vector<double> weights,
                                         double a, double b) {
    if (points.empty() || points.size() != weights.size())
        throw InvalidArgument("point_support: support and weight sizes differ or are empty");
    if (!(a < b)) throw InvalidArgument("point_support: need a < b");
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i]) || points[i] < a || points[i] > b)
            throw InvalidArgument("point_support: point outside [a,b]");
        if (i > 0 && !(points[i] > points[i - 1]))
            throw InvalidArgument("point_support: points must be strictly increasing");
        if (!(weights[i] >= 0.0)) throw InvalidArgument("point_support: negative weight");
    }
    const double total = kernels::sum(weights.data(), weights.size());
    if (std::fabs(total - 1.0) > kDistEqTol)
        throw InvalidArgument("point_support: weights sum to " + std::to_string(total));

    Distribution d;
    d.kind_ = Kind::point_support;
    d.points_ = std::move(points);
    d.weights_ = std::move(weights);
    d.a_ = a;
    d.b_ = b;
    build_cdf(d.weights_, d.cdf_);
    return d;
}

Distribution Distribution::multinomial(std::vector<double> probs) {
    if (probs.empty()) throw InvalidArgument("multinomial: no categories");
    std::vector<double> kept;
    kept.reserve(probs.size());
    double dropped = 0.0;
    for (double p : probs) {
        if (!std::isfinite(p)) throw InvalidArgument("multinomial: non-finite probability");
        if (p > 0.0) {
            kept.push_back(p);
        } else {
            dropped += std::fabs(p);
        }
    }
    if (dropped >= kDistEqTol)
        throw InvalidArgument("multinomial: dropped mass " + std::to_string(dropped) +
                              " exceeds tolerance");
    if (kept.empty()) throw InvalidArgument("multinomial: all categories empty");
    const double total = kernels::sum(kept.data(), kept.size());
    if (std::fabs(total - 1.0) > kDistEqTol)
        throw InvalidArgument("multinomial: probabilities sum to " + std::to_string(total));
    if (dropped > 0.0) kernels::scale(1.0 / total, kept.data(), kept.size());

    Distribution d;
    d.kind_ = Kind::multinomial;
    d.weights_ = std::move(kept);
    build_cdf(d.weights_, d.cdf_);
    return d;
}

Distribution Distribution::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("bernoulli: p outside [0,1]");
    if (p == 0.0) return point_support({0.0}, {1.0});
    if (p == 1.0) return point_support({1.0}, {1.0});
    return point_support({0.0, 1.0}, {1.0 - p, p});
}

const std::vector<double>& Distribution::points() const {
    if (!is_point_support()) throw VariantMismatch("points(): not a point-support law");
    return points_;
}

const std::vector<double>& Distribution::weights() const {
    if (!is_point_support()) throw VariantMismatch("weights(): not a point-support law");
    return weights_;
}

double Distribution::lower() const { return a_; }
double Distribution::upper() const { return b_; }

const std::vector<double>& Distribution::probs() const {
    if (!is_multinomial()) throw VariantMismatch("probs(): not a multinomial");
    return weights_;
}

std::size_t Distribution::category_count() const { return probs().size(); }

double Distribution::mean() const {
    return kernels::dot(points().data(), weights_.data(), weights_.size());
}

double Distribution::variance() const {
    const double m = mean();
    double acc = 0.0;
    for (std::size_t i = 0; i < points_.size(); ++i) {
        const double d = points_[i] - m;
        acc += weights_[i] * d * d;
    }
    return acc;
}

bool Distribution::equals(const Distribution& other) const {
    if (kind_ != other.kind_ || weights_.size() != other.weights_.size()) return false;
    if (kernels::max_abs_diff(weights_.data(), other.weights_.data(), weights_.size()) > kDistEqTol)
        return false;
    if (is_point_support() &&
        kernels::max_abs_diff(points_.data(), other.points_.data(), points_.size()) > kDistEqTol)
        return false;
    return true;
}

void Distribution::sample_values(int n, rng::Stream& rng, std::vector<double>& out) const {
    if (!is_point_support()) throw VariantMismatch("sample_values: not a point-support law");
    out.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = points_[sample_index(cdf_, rng)];
}

void Distribution::sample_counts(int n, rng::Stream& rng, std::vector<std::int64_t>& out) const {
    if (!is_multinomial()) throw VariantMismatch("sample_counts: not a multinomial");
    out.assign(weights_.size(), 0);
    for (int i = 0; i < n; ++i) ++out[sample_index(cdf_, rng)];
}

Observation Observation::real_sample(std::vector<double> values, double a, double b) {
    for (double v : values)
        if (!std::isfinite(v) || v < a || v > b)
            throw InvalidArgument("real_sample: value outside [a,b]");
    Observation o;
    o.kind_ = Kind::real_sample;
    o.n_ = static_cast<int>(values.size());
    o.values_ = std::move(values);
    return o;
}

Observation Observation::from_counts(const std::vector<std::int64_t>& positive_counts, int n) {
    Observation o;
    o.kind_ = Kind::count_fingerprint;
    o.n_ = n;
    o.fingerprint_.assign(static_cast<std::size_t>(n), 0);
    std::int64_t total = 0;
    for (std::int64_t c : positive_counts) {
        if (c < 1) throw InvalidArgument("fingerprint: nonpositive category count");
        if (c > n) throw InvalidArgument("fingerprint: count exceeds sample size");
        ++o.fingerprint_[static_cast<std::size_t>(c - 1)];
        total += c;
    }
    if (total != n) throw InvalidArgument("fingerprint: counts sum to " + std::to_string(total) +
                                          ", expected " + std::to_string(n));
    o.raw_counts_ = positive_counts;
    std::sort(o.raw_counts_.begin(), o.raw_counts_.end());
    return o;
}

Observation Observation::from_full_counts(const std::vector<std::int64_t>& all_counts, int n) {
    std::vector<std::int64_t> positive;
    positive.reserve(all_counts.size());
    for (std::int64_t c : all_counts)
        if (c > 0) positive.push_back(c);
    return from_counts(positive, n);
}

const std::vector<double>& Observation::values() const {
    if (kind_ != Kind::real_sample) throw VariantMismatch("values(): not a real sample");
    return values_;
}

const std::vector<std::int64_t>& Observation::fingerprint() const {
    if (kind_ != Kind::count_fingerprint) throw VariantMismatch("fingerprint(): not count data");
    return fingerprint_;
}

const std::vector<std::int64_t>& Observation::raw_counts() const {
    if (kind_ != Kind::count_fingerprint) throw VariantMismatch("raw_counts(): not count data");
    return raw_counts_;
}

}  // namespace gmx::core
