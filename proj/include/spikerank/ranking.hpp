#pragma once

#include "spikerank/dynamics.hpp"
#include "spikerank/event_log.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace spikerank {

struct RankedUser {
    UserIndex user = 0;
    double score = 0.0;

    friend bool operator==(const RankedUser&, const RankedUser&) = default;
};

/// Users in descending score order, ties by ascending index.
struct Ranking {
    std::vector<RankedUser> entries;
    bool short_list = false; // fewer than r users were available

    std::vector<UserIndex> users() const;
};

/// Top r entries of `scores`. Requires r >= 1; r > n returns all n with short_list set.
Ranking rank_users(std::span<const double> scores, std::size_t r);

/// Mean number of messages each sender received in (t_send - lookback, t_send],
/// averaged over the sends in each bin (bins from time 0, as volume_series).
/// Bins without sends are std::nullopt.
std::vector<std::optional<double>> responsiveness(const EventLog& log, double bin_width,
                                                  double lookback = 60.0);

struct SweepResult {
    std::vector<double> grid;          // strictly increasing, grid[0] == 0
    std::vector<std::uint64_t> totals; // spike-window sends of the predicted top r
    std::uint64_t baseline = 0;        // total at alpha_star = 0
    std::vector<std::int64_t> deltas;  // totals - baseline
    std::vector<Ranking> rankings;     // top r per grid value
    std::size_t r = 0;
    double rho = 0.0;
    bool empty_graph = false;          // no edges in the bau window
};

/// Business-as-usual to spike evaluation. A, b and rho(A) come from the bau
/// window; for each alpha_star the top r of the steady state are scored by
/// their raw send count in the spike window. 0 is added to the grid if absent.
SweepResult evaluate_spike(const EventLog& log, const Window& bau, const Window& spike,
                           std::span<const double> grid, std::size_t r, SolverOptions opts = {});

/// 25 log-spaced points in [1e-16, 0.99] preceded by 0.
std::vector<double> default_grid();

struct SpikeBounds {
    std::size_t peak_bin = 0;
    std::size_t end_bin = 0;
    bool decayed = false; // false when volume never fell to peak / decay_factor
};

/// Peak (earliest argmax) and the first later bin at or below peak / decay_factor.
SpikeBounds detect_spike(std::span<const std::uint64_t> volume, double decay_factor = 4.0);

/// `rank,user,score` with 1-based ranks.
void write_ranking(std::ostream& out, const Ranking& ranking, const UserTable& users);

/// `alpha_star,total,delta`, alpha_star with 6 significant digits.
void write_sweep(std::ostream& out, const SweepResult& sweep);

} // namespace spikerank
