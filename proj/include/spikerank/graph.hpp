#pragma once

#include "spikerank/event_log.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace spikerank {

/// 0/1 "who listens to whom" matrix in row-compressed form.
///
/// Row i lists, sorted and without duplicates, the senders j with a_ij = 1
/// (user i receives and attends to messages from j). No diagonal entries.
class SparseAdjacency {
public:
    SparseAdjacency() : row_ptr_(1, 0) {}

    /// Empty n x n matrix.
    explicit SparseAdjacency(std::size_t n);

    /// Builds from (receiver, sender) pairs. Duplicates are merged and
    /// self-loops dropped; any index >= n throws ArgumentError.
    static SparseAdjacency from_edges(std::size_t n,
                                      std::span<const std::pair<UserIndex, UserIndex>> edges);

    std::size_t n() const { return row_ptr_.size() - 1; }
    std::size_t nnz() const { return cols_.size(); }

    std::span<const std::uint64_t> row_ptr() const { return row_ptr_; }
    std::span<const std::uint32_t> cols() const { return cols_; }
    std::span<const std::uint32_t> row(std::size_t i) const {
        return std::span(cols_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
    }
    bool has_edge(UserIndex receiver, UserIndex sender) const;

    /// Transposed structure: row j lists the receivers listening to j.
    SparseAdjacency transpose() const;

    friend bool operator==(const SparseAdjacency&, const SparseAdjacency&) = default;

private:
    std::vector<std::uint64_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
};

/// Edge (i <- j) for every event j -> i in the window with i != j.
SparseAdjacency build_adjacency(const EventLog& log, const Window& window);

/// r = A s, i.e. r_i = sum over senders j of row i of s_j. Row-parallel for large n.
std::vector<double> matvec(const SparseAdjacency& a, std::span<const double> s);
void matvec(const SparseAdjacency& a, std::span<const double> s, std::span<double> r);

struct DegreeBounds {
    std::size_t max_in_degree = 0;  // max row sum, the infinity norm
    std::size_t max_out_degree = 0; // max column sum, the 1-norm
};

DegreeBounds degree_bounds(const SparseAdjacency& a);

struct SpectralEstimate {
    double rho = 0.0;
    std::size_t iterations = 0;
    // Final width of the eigenvalue bracket; > tol means max_iter was exhausted.
    double residual = 0.0;
    std::size_t max_in_degree = 0;
    std::size_t max_out_degree = 0;

    bool converged(double tol) const { return residual <= tol; }
};

struct SpectralOptions {
    double tol = 1e-10;
    std::size_t max_iter = 10'000;
};

/// Spectral radius of A by power iteration.
///
/// The graph is split into strongly connected components (rho(A) is the
/// largest component radius). Each nontrivial component is iterated with
/// A + I from the all-ones vector, renormalized in the 1-norm every step;
/// the shift makes periodic components aperiodic without moving the Perron
/// root. The Collatz-Wielandt quotients min/max (Bx)_i / x_i bracket the
/// radius of a positive iterate, and iteration stops once the bracket is
/// narrower than tol. A = 0 returns rho = 0 immediately.
SpectralEstimate spectral_radius(const SparseAdjacency& a, SpectralOptions opts = {});

/// Strongly connected component id per node, numbered in reverse topological
/// order of the condensation (Tarjan).
std::vector<std::uint32_t> strongly_connected_components(const SparseAdjacency& a,
                                                         std::size_t* count = nullptr);

/// `receiver,sender` CSV, one row per edge sorted by (receiver, sender) index.
void write_adjacency(std::ostream& out, const SparseAdjacency& a, const UserTable* users = nullptr);

} // namespace spikerank
