#include "spikerank/graph.hpp"

#include "spikerank/errors.hpp"
#include "spikerank/kernels.hpp"
#include "spikerank/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace spikerank {

namespace {

constexpr std::size_t kParallelRowChunk = 1 << 14;

std::uint64_t pack(UserIndex receiver, UserIndex sender) {
    return (std::uint64_t{receiver} << 32) | sender;
}

void fill_from_sorted_keys(std::size_t n, std::span<const std::uint64_t> keys,
                                 std::vector<std::uint64_t>& row_ptr,
                                 std::vector<std::uint32_t>& cols) {
    row_ptr.assign(n + 1, 0);
    cols.clear();
    cols.reserve(keys.size());
    for (std::uint64_t k : keys) {
        ++row_ptr[(k >> 32) + 1];
        cols.push_back(static_cast<std::uint32_t>(k & 0xffffffffu));
    }
    for (std::size_t i = 0; i < n; ++i) row_ptr[i + 1] += row_ptr[i];
}

} // namespace

SparseAdjacency::SparseAdjacency(std::size_t n) : row_ptr_(n + 1, 0) {
    if (n > static_cast<std::size_t>(std::numeric_limits<std::int32_t>::max())) {
        throw ArgumentError("adjacency dimension exceeds 31-bit index range");
    }
}

SparseAdjacency SparseAdjacency::from_edges(std::size_t n,
                                            std::span<const std::pair<UserIndex, UserIndex>> edges) {
    SparseAdjacency a(n);
    std::vector<std::uint64_t> keys;
    keys.reserve(edges.size());
    for (auto [receiver, sender] : edges) {
        if (receiver >= n || sender >= n) throw ArgumentError("edge index out of range");
        if (receiver != sender) keys.push_back(pack(receiver, sender));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    fill_from_sorted_keys(n, keys, a.row_ptr_, a.cols_);
    return a;
}

bool SparseAdjacency::has_edge(UserIndex receiver, UserIndex sender) const {
    auto r = row(receiver);
    return std::binary_search(r.begin(), r.end(), sender);
}

SparseAdjacency SparseAdjacency::transpose() const {
    SparseAdjacency t(n());
    for (std::uint32_t c : cols_) ++t.row_ptr_[c + 1];
    for (std::size_t i = 0; i < n(); ++i) t.row_ptr_[i + 1] += t.row_ptr_[i];
    t.cols_.resize(cols_.size());
    std::vector<std::uint64_t> fill(t.row_ptr_.begin(), t.row_ptr_.end() - 1);
    // rows visited in ascending order keep each transposed row sorted
    for (std::size_t i = 0; i < n(); ++i) {
        for (std::uint32_t j : row(i)) t.cols_[fill[j]++] = static_cast<std::uint32_t>(i);
    }
    return t;
}

SparseAdjacency build_adjacency(const EventLog& log, const Window& window) {
    check_window(window, "build_adjacency");
    auto [first, last] = log.range(window);
    auto events = log.events();
    std::vector<std::uint64_t> keys;
    keys.reserve(last - first);
    for (std::size_t p = first; p < last; ++p) {
        const Event& e = events[p];
        if (e.sender != e.receiver) keys.push_back(pack(e.receiver, e.sender));
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    std::vector<std::pair<UserIndex, UserIndex>> edges;
    edges.reserve(keys.size());
    for (std::uint64_t k : keys) {
        edges.emplace_back(static_cast<UserIndex>(k >> 32), static_cast<UserIndex>(k & 0xffffffffu));
    }
    return SparseAdjacency::from_edges(log.n_users(), edges);
}

void matvec(const SparseAdjacency& a, std::span<const double> s, std::span<double> r) {
    if (s.size() != a.n() || r.size() != a.n()) {
        throw ArgumentError("matvec: vector length does not match adjacency dimension");
    }
    const auto& k = kernels::active();
    const std::uint64_t* row_ptr = a.row_ptr().data();
    const std::uint32_t* cols = a.cols().data();
    parallel_for(a.n(), kParallelRowChunk, [&](std::size_t begin, std::size_t end) {
        k.spmv_rows(row_ptr, cols, s.data(), r.data(), begin, end);
    });
}

std::vector<double> matvec(const SparseAdjacency& a, std::span<const double> s) {
    std::vector<double> r(a.n());
    matvec(a, s, r);
    return r;
}

DegreeBounds degree_bounds(const SparseAdjacency& a) {
    DegreeBounds d;
    std::vector<std::size_t> out_degree(a.n(), 0);
    auto row_ptr = a.row_ptr();
    for (std::size_t i = 0; i < a.n(); ++i) {
        d.max_in_degree = std::max<std::size_t>(d.max_in_degree, row_ptr[i + 1] - row_ptr[i]);
    }
    for (std::uint32_t j : a.cols()) ++out_degree[j];
    for (std::size_t c : out_degree) d.max_out_degree = std::max(d.max_out_degree, c);
    return d;
}

std::vector<std::uint32_t> strongly_connected_components(const SparseAdjacency& a,
                                                         std::size_t* count) {
    constexpr std::uint32_t kUnvisited = std::numeric_limits<std::uint32_t>::max();
    const std::size_t n = a.n();
    std::vector<std::uint32_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
    std::vector<std::uint32_t> stack;
    std::vector<std::uint8_t> on_stack(n, 0);
    struct Frame {
        std::uint32_t node;
        std::uint64_t next; // position in the node's row
    };
    std::vector<Frame> call;
    std::uint32_t counter = 0;
    std::uint32_t n_comp = 0;
    auto row_ptr = a.row_ptr();
    auto cols = a.cols();

    for (std::uint32_t root = 0; root < n; ++root) {
        if (index[root] != kUnvisited) continue;
        call.push_back({root, row_ptr[root]});
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;

        while (!call.empty()) {
            Frame& f = call.back();
            const std::uint32_t v = f.node;
            if (f.next < row_ptr[v + 1]) {
                const std::uint32_t w = cols[f.next++];
                if (index[w] == kUnvisited) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, row_ptr[w]});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                std::uint32_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = n_comp;
                } while (w != v);
                ++n_comp;
            }
            call.pop_back();
            if (!call.empty()) {
                std::uint32_t parent = call.back().node;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    if (count != nullptr) *count = n_comp;
    return comp;
}

namespace {

struct ComponentEstimate {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t iterations = 0;
};

// Power iteration with B = A_c + I on one irreducible block.
ComponentEstimate iterate_component(const SparseAdjacency& block, const SpectralOptions& opts) {
    const std::size_t m = block.n();
    std::vector<double> x(m, 1.0 / static_cast<double>(m));
    std::vector<double> ax(m), y(m);
    ComponentEstimate est;
    for (std::size_t it = 1; it <= opts.max_iter; ++it) {
        matvec(block, x, ax);
        kernels::affine(x, 1.0, ax, y);
        auto [lo, hi] = kernels::ratio_bounds(y, x);
        est = {lo - 1.0, hi - 1.0, it};
        if (hi - lo < opts.tol) break;
        double total = kernels::sum(y);
        kernels::scale(y, 1.0 / total);
        std::swap(x, y);
    }
    return est;
}

} // namespace

SpectralEstimate spectral_radius(const SparseAdjacency& a, SpectralOptions opts) {
    if (!(opts.tol > 0.0)) throw ArgumentError("spectral_radius: tol must be > 0");
    if (opts.max_iter < 1) throw ArgumentError("spectral_radius: max_iter must be >= 1");

    SpectralEstimate out;
    DegreeBounds deg = degree_bounds(a);
    out.max_in_degree = deg.max_in_degree;
    out.max_out_degree = deg.max_out_degree;
    if (a.nnz() == 0) return out;

    std::size_t n_comp = 0;
    auto comp = strongly_connected_components(a, &n_comp);

    // group nodes by component, preserving ascending node order
    std::vector<std::uint64_t> start(n_comp + 1, 0);
    for (std::uint32_t c : comp) ++start[c + 1];
    for (std::size_t c = 0; c < n_comp; ++c) start[c + 1] += start[c];
    std::vector<std::uint32_t> members(a.n());
    std::vector<std::uint32_t> local(a.n());
    {
        std::vector<std::uint64_t> fill(start.begin(), start.end() - 1);
        for (std::uint32_t v = 0; v < a.n(); ++v) {
            local[v] = static_cast<std::uint32_t>(fill[comp[v]] - start[comp[v]]);
            members[fill[comp[v]]++] = v;
        }
    }

    double best_lo = 0.0;
    double best_hi = 0.0;
    std::vector<std::pair<UserIndex, UserIndex>> edges;
    for (std::size_t c = 0; c < n_comp; ++c) {
        const std::size_t size = start[c + 1] - start[c];
        if (size < 2) continue; // a single node without a self-loop has radius 0
        edges.clear();
        for (std::uint64_t p = start[c]; p < start[c + 1]; ++p) {
            std::uint32_t v = members[p];
            for (std::uint32_t w : a.row(v)) {
                if (comp[w] == c) edges.emplace_back(local[v], local[w]);
            }
        }
        auto block = SparseAdjacency::from_edges(size, edges);
        ComponentEstimate est = iterate_component(block, opts);
        out.iterations = std::max(out.iterations, est.iterations);
        best_lo = std::max(best_lo, est.lo);
        best_hi = std::max(best_hi, est.hi);
    }
    out.rho = std::max(0.0, 0.5 * (best_lo + best_hi));
    out.residual = best_hi - best_lo;
    return out;
}

void write_adjacency(std::ostream& out, const SparseAdjacency& a, const UserTable* users) {
    out << "receiver,sender\n";
    for (std::size_t i = 0; i < a.n(); ++i) {
        for (std::uint32_t j : a.row(i)) {
            if (users != nullptr) {
                out << users->name(static_cast<UserIndex>(i)) << ',' << users->name(j) << '\n';
            } else {
                out << i << ',' << j << '\n';
            }
        }
    }
}

} // namespace spikerank
