#pragma once

#include <stdexcept>
#include <string>

namespace gmx {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Functional applied to an incompatible distribution or observation variant.
struct VariantMismatch : Error {
    using Error::Error;
};

// Construction-time invariant violations (weights, supports, probabilities).
struct InvalidArgument : Error {
    using Error::Error;
};

// LP has no feasible prior on the given grid.
struct Infeasible : Error {
    using Error::Error;
};

// Brute-force oracle asked to enumerate beyond its size limits.
struct SizeLimit : Error {
    using Error::Error;
};

// Risk table / prior evaluated against a different grid.
struct GridMismatch : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace gmx
