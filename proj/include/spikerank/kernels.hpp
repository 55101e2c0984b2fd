#pragma once

// Data-parallel inner loops used by the solvers. Every kernel has a scalar
// reference implementation; on x86-64 an AVX2 variant is selected at runtime
// when the CPU supports it. SPIKERANK_SIMD=scalar|avx2 overrides detection.
//
// Elementwise kernels (affine, scale) are bit-identical across variants.
// So are max_abs_diff and ratio_bounds. The summing reductions (spmv rows,
// sum) may differ in the last bits because lane-wise accumulation reorders
// the additions; they agree exactly whenever every partial sum is exactly
// representable (e.g. integral inputs).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>

namespace spikerank::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct KernelTable {
    Isa isa;
    // y[i] = sum_{p in [row_ptr[i], row_ptr[i+1])} x[cols[p]] for i in [row_begin, row_end)
    void (*spmv_rows)(const std::uint64_t* row_ptr, const std::uint32_t* cols, const double* x,
                      double* y, std::size_t row_begin, std::size_t row_end);
    // out = base + factor * v
    void (*affine)(const double* base, double factor, const double* v, double* out, std::size_t n);
    // max_i |a[i] - b[i]|
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
    double (*sum)(const double* x, std::size_t n);
    // x *= factor
    void (*scale)(double* x, double factor, std::size_t n);
    // (min_i y[i]/x[i], max_i y[i]/x[i]); x must be strictly positive
    std::pair<double, double> (*ratio_bounds)(const double* y, const double* x, std::size_t n);
};

bool isa_available(Isa isa);

// Table for a specific ISA; throws ArgumentError if it is not available.
const KernelTable& table_for(Isa isa);

// Table selected for this process (detection + SPIKERANK_SIMD override).
const KernelTable& active();

// Forces the process-wide selection. Not thread-safe; intended for tests and
// benchmarks that compare variants.
void select(Isa isa);

// Span-level conveniences over active().
void spmv(std::span<const std::uint64_t> row_ptr, std::span<const std::uint32_t> cols,
          std::span<const double> x, std::span<double> y);
void affine(std::span<const double> base, double factor, std::span<const double> v,
            std::span<double> out);
double max_abs_diff(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> x);
void scale(std::span<double> x, double factor);
std::pair<double, double> ratio_bounds(std::span<const double> y, std::span<const double> x);

namespace detail {
extern const KernelTable scalar_table;
#if defined(SPIKERANK_HAS_AVX2)
extern const KernelTable avx2_table;
#endif
} // namespace detail

} // namespace spikerank::kernels
