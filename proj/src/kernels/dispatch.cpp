#include "spikerank/errors.hpp"
#include "spikerank/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace spikerank::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(SPIKERANK_HAS_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* forced = std::getenv("SPIKERANK_SIMD")) {
        std::string_view f(forced);
        if (f == "scalar") return Isa::scalar;
    }
    return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<const KernelTable*>& selected() {
    static std::atomic<const KernelTable*> table{&table_for(detect())};
    return table;
}

void check_same(std::size_t a, std::size_t b) {
    if (a != b) throw ArgumentError("kernel operand length mismatch");
}

} // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) {
    if (isa == Isa::scalar) return true;
    static const bool avx2 = cpu_has_avx2();
    return avx2;
}

const KernelTable& table_for(Isa isa) {
    if (!isa_available(isa)) {
        throw ArgumentError(std::string("kernel variant not available: ") +
                            std::string(isa_name(isa)));
    }
#if defined(SPIKERANK_HAS_AVX2)
    if (isa == Isa::avx2) return detail::avx2_table;
#endif
    return detail::scalar_table;
}

const KernelTable& active() { return *selected().load(std::memory_order_relaxed); }

void select(Isa isa) { selected().store(&table_for(isa), std::memory_order_relaxed); }

void spmv(std::span<const std::uint64_t> row_ptr, std::span<const std::uint32_t> cols,
          std::span<const double> x, std::span<double> y) {
    if (row_ptr.empty()) throw ArgumentError("spmv: row_ptr must have n + 1 entries");
    check_same(row_ptr.size() - 1, y.size());
    active().spmv_rows(row_ptr.data(), cols.data(), x.data(), y.data(), 0, y.size());
}

void affine(std::span<const double> base, double factor, std::span<const double> v,
            std::span<double> out) {
    check_same(base.size(), v.size());
    check_same(base.size(), out.size());
    active().affine(base.data(), factor, v.data(), out.data(), out.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    check_same(a.size(), b.size());
    return active().max_abs_diff(a.data(), b.data(), a.size());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

void scale(std::span<double> x, double factor) { active().scale(x.data(), factor, x.size()); }

std::pair<double, double> ratio_bounds(std::span<const double> y, std::span<const double> x) {
    check_same(y.size(), x.size());
    return active().ratio_bounds(y.data(), x.data(), x.size());
}

} // namespace spikerank::kernels
