#include "spikerank/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

// Compiled with -mavx2 -mfma -ffp-contract=off. Only reached through the
// dispatch table after a runtime CPU check.

namespace spikerank::kernels {
namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    return std::max(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

inline double hmin(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_min_pd(lo, hi);
    return std::min(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

// Column indices are < 2^31 (enforced when the adjacency is built), so the
// signed 32-bit gather is safe.
void spmv_rows_avx2(const std::uint64_t* row_ptr, const std::uint32_t* cols, const double* x,
                    double* y, std::size_t row_begin, std::size_t row_end) {
    for (std::size_t i = row_begin; i < row_end; ++i) {
        std::uint64_t p = row_ptr[i];
        const std::uint64_t end = row_ptr[i + 1];
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        for (; p + 8 <= end; p += 8) {
            __m128i idx0 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + p));
            __m128i idx1 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + p + 4));
            acc0 = _mm256_add_pd(acc0, _mm256_i32gather_pd(x, idx0, 8));
            acc1 = _mm256_add_pd(acc1, _mm256_i32gather_pd(x, idx1, 8));
        }
        for (; p + 4 <= end; p += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(cols + p));
            acc0 = _mm256_add_pd(acc0, _mm256_i32gather_pd(x, idx, 8));
        }
        double acc = hsum(_mm256_add_pd(acc0, acc1));
        for (; p < end; ++p) acc += x[cols[p]];
        y[i] = acc;
    }
}

void affine_avx2(const double* base, double factor, const double* v, double* out, std::size_t n) {
    const __m256d f = _mm256_set1_pd(factor);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d scaled = _mm256_mul_pd(f, _mm256_loadu_pd(v + i));
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(base + i), scaled));
    }
    for (; i < n; ++i) {
        double scaled = factor * v[i];
        out[i] = base[i] + scaled;
    }
}

double max_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, d));
    }
    double r = hmax(m);
    for (; i < n; ++i) r = std::max(r, std::fabs(a[i] - b[i]));
    return r;
}

double sum_avx2(const double* x, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    double r = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) r += x[i];
    return r;
}

void scale_avx2(double* x, double factor, std::size_t n) {
    const __m256d f = _mm256_set1_pd(factor);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), f));
    for (; i < n; ++i) x[i] *= factor;
}

std::pair<double, double> ratio_bounds_avx2(const double* y, const double* x, std::size_t n) {
    __m256d lo = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    __m256d hi = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d r = _mm256_div_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i));
        lo = _mm256_min_pd(lo, r);
        hi = _mm256_max_pd(hi, r);
    }
    double l = hmin(lo);
    double h = hmax(hi);
    for (; i < n; ++i) {
        double r = y[i] / x[i];
        l = std::min(l, r);
        h = std::max(h, r);
    }
    return {l, h};
}

} // namespace

namespace detail {
const KernelTable avx2_table{
    Isa::avx2,      spmv_rows_avx2, affine_avx2,       max_abs_diff_avx2,
    sum_avx2,       scale_avx2,     ratio_bounds_avx2,
};
} // namespace detail

} // namespace spikerank::kernels
