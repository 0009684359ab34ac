#include "gmx/kernels.hpp"

#include <cmath>

// Reference kernels. The blocked reductions below define the canonical
// evaluation order: four interleaved accumulators over the aligned body,
// combined as (a0+a1)+(a2+a3), then a sequential tail. SIMD backends must
// reproduce this order exactly so results match bit for bit.

namespace gmx::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) {
        a0 += x[i] * y[i];
        a1 += x[i + 1] * y[i + 1];
        a2 += x[i + 2] * y[i + 2];
        a3 += x[i + 3] * y[i + 3];
    }
    double acc = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_scalar(const double* x, std::size_t n) {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) {
        a0 += x[i];
        a1 += x[i + 1];
        a2 += x[i + 2];
        a3 += x[i + 3];
    }
    double acc = (a0 + a1) + (a2 + a3);
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void relu_scalar(double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

double max_abs_diff_scalar(const double* x, const double* y, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(x[i] - y[i]);
        if (d > m) m = d;
    }
    return m;
}

}  // namespace

const Ops& scalar_ops() {
    static const Ops table{dot_scalar, sum_scalar,   axpy_scalar,
                           scale_scalar, relu_scalar, max_abs_diff_scalar};
    return table;
}

}  // namespace gmx::kernels
