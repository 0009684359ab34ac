#include "gmx/oracle.hpp"

#include <cmath>

#include "gmx/errors.hpp"

namespace gmx::oracle {

void MeanProblemSpec::validate() const {
    if (!(a < b)) throw InvalidArgument("mean problem: need a < b");
    if (!(mu >= a && mu <= b)) throw InvalidArgument("mean problem: mu outside [a,b]");
    if (n < 1) throw InvalidArgument("mean problem: n must be >= 1");
}

AffineCoefficients gamma_minimax_affine(const MeanProblemSpec& spec) {
    spec.validate();
    if (spec.a != 0.0 || spec.b != 1.0)
        throw InvalidArgument("gamma_minimax_affine is stated on [0,1]");
    const double sn = std::sqrt(static_cast<double>(spec.n));
    return {spec.mu / (1.0 + sn), sn / (1.0 + sn)};
}

double minimax_bayes_risk(const MeanProblemSpec& spec) {
    spec.validate();
    if (spec.a != 0.0 || spec.b != 1.0)
        throw InvalidArgument("minimax_bayes_risk is stated on [0,1]");
    const double sn = std::sqrt(static_cast<double>(spec.n));
    return spec.mu * (1.0 - spec.mu) / ((1.0 + sn) * (1.0 + sn));
}

VarianceBound max_variance_bound(double a, double b, double mu) {
    if (!(a < b)) throw InvalidArgument("max_variance_bound: need a < b");
    if (!(mu >= a && mu <= b)) throw InvalidArgument("max_variance_bound: mu outside [a,b]");
    const double bound = (b - mu) * (mu - a);
    core::Distribution extremal =
        mu == a   ? core::Distribution::point_support({a}, {1.0}, a, b)
        : mu == b ? core::Distribution::point_support({b}, {1.0}, a, b)
                  : core::Distribution::point_support({a, b}, {(b - mu) / (b - a),
                                                               (mu - a) / (b - a)},
                                                      a, b);
    return {bound, std::move(extremal)};
}

}  // namespace gmx::oracle
