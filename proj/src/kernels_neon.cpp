#include "gmx/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

// NEON variants. Two float64x2_t accumulators cover the canonical lane slots
// {0,1} and {2,3} of the 4-wide reference order; mul and add stay separate,
// matching kernels_scalar.cpp bit for bit.

namespace gmx::kernels {
namespace {

inline double hsum_canonical(float64x2_t lo, float64x2_t hi) {
    return (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(lo, 1)) +
           (vgetq_lane_f64(hi, 0) + vgetq_lane_f64(hi, 1));
}

double dot_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) {
        lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
        hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
    }
    double acc = hsum_canonical(lo, hi);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_neon(const double* x, std::size_t n) {
    float64x2_t lo = vdupq_n_f64(0.0), hi = vdupq_n_f64(0.0);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) {
        lo = vaddq_f64(lo, vld1q_f64(x + i));
        hi = vaddq_f64(hi, vld1q_f64(x + i + 2));
    }
    double acc = hsum_canonical(lo, hi);
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    const std::size_t n2 = n & ~std::size_t(1);
    for (; i < n2; i += 2) {
        const float64x2_t prod = vmulq_f64(va, vld1q_f64(x + i));
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double a, double* x, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(a);
    std::size_t i = 0;
    const std::size_t n2 = n & ~std::size_t(1);
    for (; i < n2; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void relu_neon(double* x, std::size_t n) {
    const float64x2_t zero = vdupq_n_f64(0.0);
    std::size_t i = 0;
    const std::size_t n2 = n & ~std::size_t(1);
    for (; i < n2; i += 2) vst1q_f64(x + i, vmaxq_f64(vld1q_f64(x + i), zero));
    for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

double max_abs_diff_neon(const double* x, const double* y, std::size_t n) {
    float64x2_t vmax = vdupq_n_f64(0.0);
    std::size_t i = 0;
    const std::size_t n2 = n & ~std::size_t(1);
    for (; i < n2; i += 2) {
        const float64x2_t d = vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
        vmax = vmaxq_f64(vmax, d);
    }
    double m = vgetq_lane_f64(vmax, 0);
    if (vgetq_lane_f64(vmax, 1) > m) m = vgetq_lane_f64(vmax, 1);
    for (; i < n; ++i) {
        const double d = x[i] - y[i] < 0.0 ? y[i] - x[i] : x[i] - y[i];
        if (d > m) m = d;
    }
    return m;
}

}  // namespace

const Ops& neon_ops() {
    static const Ops table{dot_neon, sum_neon,  axpy_neon,
                           scale_neon, relu_neon, max_abs_diff_neon};
    return table;
}

}  // namespace gmx::kernels

#endif  // __aarch64__
