#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gmx/distribution.hpp"

namespace gmx::core {

class Grid;

// A generalized-moment functional P -> R. Leaves are Mean, ShannonEntropy
// and ExpectedNewCategories; Indicator / Power / Negated wrap an inner
// functional (at most two wrappers deep).
class Functional {
public:
    enum class Kind { mean, shannon_entropy, expected_new_categories, indicator, power, negated };

    static Functional mean();
    static Functional shannon_entropy();
    // Unconditional expected number of new categories in a future sample of
    // size m given an observed sample of size n.
    static Functional expected_new_categories(int n, int m);
    static Functional indicator(Functional inner, double lo, double hi);
    static Functional power(Functional inner, double kappa);
    static Functional negated(Functional inner);

    Kind kind() const { return kind_; }
    const Functional& inner() const;
    int sample_size() const { return n_; }
    int future_size() const { return m_; }
    double interval_lo() const { return lo_; }
    double interval_hi() const { return hi_; }
    double exponent() const { return kappa_; }

    std::string describe() const;

private:
    Functional() = default;

    Kind kind_ = Kind::mean;
    std::shared_ptr<const Functional> inner_;
    int n_ = 0, m_ = 0;       // expected_new_categories
    double lo_ = 0, hi_ = 0;  // indicator interval
    double kappa_ = 1.0;      // power exponent
    int depth_ = 0;           // wrapper depth
};

double eval_functional(const Functional& f, const Distribution& p);

// One row Phi_k . pi <= c_k of the prior constraint set. Equality and lower
// bounds are rewritten as <= rows at construction, so downstream code only
// ever sees upper bounds.
struct MomentConstraint {
    Functional functional;
    double bound;
    std::string label;

    static MomentConstraint upper(Functional f, double c, std::string label = "");
    static MomentConstraint lower(Functional f, double c, std::string label = "");
    static std::pair<MomentConstraint, MomentConstraint> equality(Functional f, double c,
                                                                  std::string label = "");
};

std::vector<double> constraint_row(const MomentConstraint& k, const Grid& grid);

}  // namespace gmx::core
