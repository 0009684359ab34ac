#pragma once

#include "gmx/distribution.hpp"

namespace gmx::oracle {

// Mean-estimation problem: priors on [a,b]-supported laws with prior mean of
// the mean functional pinned to mu, sample size n.
struct MeanProblemSpec {
    double mu = 0.3;
    int n = 10;
    double a = 0.0, b = 1.0;

    void validate() const;
};

struct AffineCoefficients {
    double b0 = 0.0, b1 = 0.0;
};

// The minimax rule x -> (mu + sqrt(n) xbar) / (1 + sqrt(n)) as affine
// coefficients; stated on [0,1].
AffineCoefficients gamma_minimax_affine(const MeanProblemSpec& spec);

// Its maximal Bayes risk mu (1 - mu) / (1 + sqrt(n))^2.
double minimax_bayes_risk(const MeanProblemSpec& spec);

struct VarianceBound {
    double bound = 0.0;
    core::Distribution extremal;
};

// Maximum variance (b - mu)(mu - a) over [a,b]-supported laws with mean mu,
// attained by the two-point law at {a, b}.
VarianceBound max_variance_bound(double a, double b, double mu);

}  // namespace gmx::oracle
