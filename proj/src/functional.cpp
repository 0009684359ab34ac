#include "gmx/functional.hpp"

#include <cmath>

#include "gmx/errors.hpp"
#include "gmx/grid.hpp"
#include "gmx/kernels.hpp"

namespace gmx::core {

namespace {

Functional wrap_check(Functional&& f, int inner_depth) {
    if (inner_depth >= 2) throw InvalidArgument("functional: composition depth exceeds 2");
    return std::move(f);
}

}  // namespace

Functional Functional::mean() {
    Functional f;
    f.kind_ = Kind::mean;
    return f;
}

Functional Functional::shannon_entropy() {
    Functional f;
    f.kind_ = Kind::shannon_entropy;
    return f;
}

Functional Functional::expected_new_categories(int n, int m) {
    if (n < 1 || m < 1) throw InvalidArgument("expected_new_categories: need n, m >= 1");
    Functional f;
    f.kind_ = Kind::expected_new_categories;
    f.n_ = n;
    f.m_ = m;
    return f;
}

Functional Functional::indicator(Functional inner, double lo, double hi) {
    if (!(lo <= hi)) throw InvalidArgument("indicator: empty interval");
    Functional f;
    f.kind_ = Kind::indicator;
    f.depth_ = inner.depth_ + 1;
    f.lo_ = lo;
    f.hi_ = hi;
    const int d = inner.depth_;
    f.inner_ = std::make_shared<const Functional>(std::move(inner));
    return wrap_check(std::move(f), d);
}

Functional Functional::power(Functional inner, double kappa) {
    if (!(kappa >= 1.0)) throw InvalidArgument("power: exponent must be >= 1");
    Functional f;
    f.kind_ = Kind::power;
    f.depth_ = inner.depth_ + 1;
    f.kappa_ = kappa;
    const int d = inner.depth_;
    f.inner_ = std::make_shared<const Functional>(std::move(inner));
    return wrap_check(std::move(f), d);
}

Functional Functional::negated(Functional inner) {
    Functional f;
    f.kind_ = Kind::negated;
    f.depth_ = inner.depth_ + 1;
    const int d = inner.depth_;
    f.inner_ = std::make_shared<const Functional>(std::move(inner));
    return wrap_check(std::move(f), d);
}

const Functional& Functional::inner() const {
    if (!inner_) throw InvalidArgument("functional: leaf has no inner functional");
    return *inner_;
}

std::string Functional::describe() const {
    switch (kind_) {
        case Kind::mean:
            return "mean";
        case Kind::shannon_entropy:
            return "entropy";
        case Kind::expected_new_categories:
            return "new_categories(n=" + std::to_string(n_) + ",m=" + std::to_string(m_) + ")";
        case Kind::indicator:
            return "1{" + inner().describe() + " in [" + std::to_string(lo_) + "," +
                   std::to_string(hi_) + "]}";
        case Kind::power:
            return inner().describe() + "^" + std::to_string(kappa_);
        case Kind::negated:
            return "-" + inner().describe();
    }
    return "?";
}

double eval_functional(const Functional& f, const Distribution& p) {
    switch (f.kind()) {
        case Functional::Kind::mean:
            if (!p.is_point_support()) throw VariantMismatch("mean needs a point-support law");
            return p.mean();
        case Functional::Kind::shannon_entropy: {
            if (!p.is_multinomial()) throw VariantMismatch("entropy needs a multinomial");
            double h = 0.0;
            for (double q : p.probs()) h -= q * std::log(q);
            return h;
        }
        case Functional::Kind::expected_new_categories: {
            if (!p.is_multinomial())
                throw VariantMismatch("expected_new_categories needs a multinomial");
            // sum_k (1-p_k)^n (1-(1-p_k)^m): the chance category k is unseen
            // in n draws times the chance it appears among m more.
            double acc = 0.0;
            for (double q : p.probs()) {
                const double miss = std::pow(1.0 - q, f.sample_size());
                acc += miss * (1.0 - std::pow(1.0 - q, f.future_size()));
            }
            return acc;
        }
        case Functional::Kind::indicator: {
            const double v = eval_functional(f.inner(), p);
            return (v >= f.interval_lo() && v <= f.interval_hi()) ? 1.0 : 0.0;
        }
        case Functional::Kind::power:
            return std::pow(eval_functional(f.inner(), p), f.exponent());
        case Functional::Kind::negated:
            return -eval_functional(f.inner(), p);
    }
    throw InvalidArgument("eval_functional: unknown kind");
}

MomentConstraint MomentConstraint::upper(Functional f, double c, std::string label) {
    if (label.empty()) label = f.describe() + " <= " + std::to_string(c);
    return {std::move(f), c, std::move(label)};
}

MomentConstraint MomentConstraint::lower(Functional f, double c, std::string label) {
    if (label.empty()) label = f.describe() + " >= " + std::to_string(c);
    return {Functional::negated(std::move(f)), -c, std::move(label)};
}

std::pair<MomentConstraint, MomentConstraint> MomentConstraint::equality(Functional f, double c,
                                                                         std::string label) {
    if (label.empty()) label = f.describe() + " == " + std::to_string(c);
    MomentConstraint up = upper(f, c, label + " (ub)");
    MomentConstraint lo = lower(std::move(f), c, label + " (lb)");
    return {std::move(up), std::move(lo)};
}

std::vector<double> constraint_row(const MomentConstraint& k, const Grid& grid) {
    std::vector<double> row(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        row[i] = eval_functional(k.functional, grid[i]);
        if (!std::isfinite(row[i]))
            throw InvalidArgument("constraint_row: non-finite value of " + k.functional.describe());
    }
    return row;
}

}  // namespace gmx::core
