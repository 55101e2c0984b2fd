#include "spikerank/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spikerank::kernels {
namespace {

void spmv_rows_scalar(const std::uint64_t* row_ptr, const std::uint32_t* cols, const double* x,
                      double* y, std::size_t row_begin, std::size_t row_end) {
    for (std::size_t i = row_begin; i < row_end; ++i) {
        double acc = 0.0;
        for (std::uint64_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) acc += x[cols[p]];
        y[i] = acc;
    }
}

void affine_scalar(const double* base, double factor, const double* v, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        double scaled = factor * v[i];
        out[i] = base[i] + scaled;
    }
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void scale_scalar(double* x, double factor, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= factor;
}

std::pair<double, double> ratio_bounds_scalar(const double* y, const double* x, std::size_t n) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] / x[i];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo, hi};
}

} // namespace

namespace detail {
const KernelTable scalar_table{
    Isa::scalar,       spmv_rows_scalar, affine_scalar,      max_abs_diff_scalar,
    sum_scalar,        scale_scalar,     ratio_bounds_scalar,
};
} // namespace detail

} // namespace spikerank::kernels
