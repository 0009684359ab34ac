#pragma once

#include <cstdint>
#include <vector>

#include "gmx/rng.hpp"

namespace gmx::core {

// Componentwise tolerance for distribution equality; fixed so grid dedup is
// deterministic.
inline constexpr double kDistEqTol = 1e-12;

// A finite-support law: either points on an interval [a,b] with weights, or
// a multinomial over K unlabeled categories with strictly positive masses.
class Distribution {
public:
    enum class Kind { point_support, multinomial };

    static Distribution point_support(std::vector<double> points, std::vector<double> weights,
                                      double a = 0.0, double b = 1.0);
    static Distribution multinomial(std::vector<double> probs);

    // Convenience: the two-point {0,1} law with success probability p (p in
    // (0,1)), or the degenerate point mass when p is exactly 0 or 1.
    static Distribution bernoulli(double p);

    Kind kind() const { return kind_; }
    bool is_point_support() const { return kind_ == Kind::point_support; }
    bool is_multinomial() const { return kind_ == Kind::multinomial; }

    const std::vector<double>& points() const;
    const std::vector<double>& weights() const;
    double lower() const;
    double upper() const;

    const std::vector<double>& probs() const;
    std::size_t category_count() const;

    double mean() const;      // point support only
    double variance() const;  // point support only

    bool equals(const Distribution& other) const;

    // Draws n iid values (point support). Values land on the support points.
    void sample_values(int n, rng::Stream& rng, std::vector<double>& out) const;

    // Draws n iid categorical observations (multinomial) and returns the
    // per-category counts, zeros included.
    void sample_counts(int n, rng::Stream& rng, std::vector<std::int64_t>& out) const;

private:
    Distribution() = default;

    Kind kind_ = Kind::point_support;
    std::vector<double> points_;
    std::vector<double> weights_;  // point-support weights or multinomial probs
    std::vector<double> cdf_;      // cumulative weights for sampling
    double a_ = 0.0, b_ = 1.0;
};

// One observed dataset. RealSample carries the raw ordered draws; a
// CountFingerprint carries f_1..f_n (f_j = number of observed categories
// seen exactly j times) together with the positive counts themselves.
class Observation {
public:
    enum class Kind { real_sample, count_fingerprint };

    static Observation real_sample(std::vector<double> values, double a = 0.0, double b = 1.0);

    // Builds the fingerprint of length n from positive category counts.
    static Observation from_counts(const std::vector<std::int64_t>& positive_counts, int n);

    // Builds from the full count vector (zeros allowed; they are truncated).
    static Observation from_full_counts(const std::vector<std::int64_t>& all_counts, int n);

    Kind kind() const { return kind_; }
    bool is_real_sample() const { return kind_ == Kind::real_sample; }

    const std::vector<double>& values() const;
    const std::vector<std::int64_t>& fingerprint() const;
    const std::vector<std::int64_t>& raw_counts() const;
    int sample_size() const { return n_; }

private:
    Observation() = default;

    Kind kind_ = Kind::real_sample;
    std::vector<double> values_;
    std::vector<std::int64_t> fingerprint_;
    std::vector<std::int64_t> raw_counts_;
    int n_ = 0;
};

}  // namespace gmx::core
