#include "gmx/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

// AVX2 variants of the reference kernels. Multiplication and addition stay
// separate (no FMA): one __m256d accumulator carries the same four partial
// sums as the scalar reference, and the lanes are combined in the same
// (a0+a1)+(a2+a3) order, so outputs are bit-identical to kernels_scalar.cpp.

namespace gmx::kernels {
namespace {

inline double hsum_canonical(__m256d v) {
    alignas(32) double lane[4];
    _mm256_store_pd(lane, v);
    return (lane[0] + lane[1]) + (lane[2] + lane[3]);
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        vacc = _mm256_add_pd(vacc, _mm256_mul_pd(vx, vy));
    }
    double acc = hsum_canonical(vacc);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d vacc = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) vacc = _mm256_add_pd(vacc, _mm256_loadu_pd(x + i));
    double acc = hsum_canonical(vacc);
    for (; i < n; ++i) acc += x[i];
    return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) {
        const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) x[i] *= a;
}

void relu_avx2(double* x, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) _mm256_storeu_pd(x + i, _mm256_max_pd(_mm256_loadu_pd(x + i), zero));
    for (; i < n; ++i) x[i] = x[i] > 0.0 ? x[i] : 0.0;
}

double max_abs_diff_avx2(const double* x, const double* y, std::size_t n) {
    const __m256d sign_mask = _mm256_set1_pd(-0.0);
    __m256d vmax = _mm256_setzero_pd();
    std::size_t i = 0;
    const std::size_t n4 = n & ~std::size_t(3);
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        vmax = _mm256_max_pd(vmax, _mm256_andnot_pd(sign_mask, d));
    }
    alignas(32) double lane[4];
    _mm256_store_pd(lane, vmax);
    double m = lane[0];
    if (lane[1] > m) m = lane[1];
    if (lane[2] > m) m = lane[2];
    if (lane[3] > m) m = lane[3];
    for (; i < n; ++i) {
        const double d = x[i] - y[i] < 0.0 ? y[i] - x[i] : x[i] - y[i];
        if (d > m) m = d;
    }
    return m;
}

}  // namespace

const Ops& avx2_ops() {
    static const Ops table{dot_avx2, sum_avx2,  axpy_avx2,
                           scale_avx2, relu_avx2, max_abs_diff_avx2};
    return table;
}

}  // namespace gmx::kernels

#endif  // x86_64
