#pragma once

#include <cstddef>

namespace gmx::kernels {

// Function table for the data-parallel inner loops (simplex row operations,
// Bayes-risk dots, network layers). Every reduction uses a fixed
// 4-accumulator block order, so all backends produce bit-identical results;
// kernels_scalar.cpp holds the reference definitions.
struct Ops {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);  // y += a*x
    void (*scale)(double, double*, std::size_t);                // x *= a
    void (*relu)(double*, std::size_t);                         // x = max(x, 0)
    double (*max_abs_diff)(const double*, const double*, std::size_t);
};

// Dispatched table. Backend is picked once per process: the GMX_KERNELS
// environment variable ("scalar", "avx2", "neon") overrides CPU detection.
const Ops& ops();
const char* backend_name();

// Reference implementations, always available (used by equivalence tests).
const Ops& scalar_ops();

inline double dot(const double* x, const double* y, std::size_t n) { return ops().dot(x, y, n); }
inline double sum(const double* x, std::size_t n) { return ops().sum(x, n); }
inline void axpy(double a, const double* x, double* y, std::size_t n) { ops().axpy(a, x, y, n); }
inline void scale(double a, double* x, std::size_t n) { ops().scale(a, x, n); }
inline void relu(double* x, std::size_t n) { ops().relu(x, n); }
inline double max_abs_diff(const double* x, const double* y, std::size_t n) {
    return ops().max_abs_diff(x, y, n);
}

}  // namespace gmx::kernels
