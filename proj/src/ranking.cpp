#include "spikerank/ranking.hpp"

#include "spikerank/errors.hpp"
#include "spikerank/graph.hpp"
#include "spikerank/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace spikerank {

std::vector<UserIndex> Ranking::users() const {
    std::vector<UserIndex> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.user);
    return out;
}

Ranking rank_users(std::span<const double> scores, std::size_t r) {
    if (r < 1) throw ArgumentError("rank_users: r must be >= 1");
    const std::size_t n = scores.size();
    Ranking out;
    out.short_list = r > n;
    const std::size_t keep = std::min(r, n);

    std::vector<UserIndex> idx(n);
    std::iota(idx.begin(), idx.end(), UserIndex{0});
    auto better = [&](UserIndex a, UserIndex b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(), better);
    out.entries.reserve(keep);
    for (std::size_t p = 0; p < keep; ++p) out.entries.push_back({idx[p], scores[idx[p]]});
    return out;
}

std::vector<std::optional<double>> responsiveness(const EventLog& log, double bin_width,
                                                  double lookback) {
    if (!(bin_width > 0.0) || !std::isfinite(bin_width)) throw ArgumentError("responsiveness: bin_width must be > 0");
    if (!(lookback > 0.0) || !std::isfinite(lookback)) throw ArgumentError("responsiveness: lookback must be > 0");
    std::vector<std::optional<double>> out;
    if (log.empty()) return out;

    // receive times per user, already in time order
    const std::size_t n = log.n_users();
    std::vector<std::uint64_t> start(n + 1, 0);
    for (const Event& e : log.events()) ++start[e.receiver + 1];
    for (std::size_t u = 0; u < n; ++u) start[u + 1] += start[u];
    std::vector<double> received(log.size());
    {
        std::vector<std::uint64_t> fill(start.begin(), start.end() - 1);
        for (const Event& e : log.events()) received[fill[e.receiver]++] = e.time;
    }

    const std::size_t bins =
        static_cast<std::size_t>(std::floor(log.events().back().time / bin_width)) + 1;
    std::vector<std::uint64_t> sends(bins, 0), seen(bins, 0);
    for (const Event& e : log.events()) {
        auto first = received.begin() + static_cast<std::ptrdiff_t>(start[e.sender]);
        auto last = received.begin() + static_cast<std::ptrdiff_t>(start[e.sender + 1]);
        auto upto_now = std::upper_bound(first, last, e.time);
        auto upto_cutoff = std::upper_bound(first, upto_now, e.time - lookback);
        std::size_t k = std::min(bins - 1, static_cast<std::size_t>(std::floor(e.time / bin_width)));
        ++sends[k];
        seen[k] += static_cast<std::uint64_t>(upto_now - upto_cutoff);
    }

    out.resize(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        if (sends[k] > 0) out[k] = static_cast<double>(seen[k]) / static_cast<double>(sends[k]);
    }
    return out;
}

std::vector<double> default_grid() {
    std::vector<double> grid{0.0};
    const double lo = -16.0;
    const double hi = std::log10(0.99);
    for (int i = 0; i < 25; ++i) grid.push_back(std::pow(10.0, lo + (hi - lo) * i / 24.0));
    grid.back() = 0.99;
    return grid;
}

SweepResult evaluate_spike(const EventLog& log, const Window& bau, const Window& spike,
                           std::span<const double> grid, std::size_t r, SolverOptions opts) {
    check_window(bau, "evaluate_spike: bau");
    check_window(spike, "evaluate_spike: spike");
    if (bau.end > spike.start) throw ArgumentError("evaluate_spike: bau window must precede spike window");
    if (r < 1) throw ArgumentError("evaluate_spike: r must be >= 1");

    SweepResult out;
    out.r = r;
    out.grid.assign(grid.begin(), grid.end());
    for (double g : out.grid) {
        if (!(g >= 0.0) || !(g < 1.0)) throw DomainError("evaluate_spike: grid values must lie in [0, 1)");
    }
    out.grid.push_back(0.0);
    std::sort(out.grid.begin(), out.grid.end());
    out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());

    const SparseAdjacency a = build_adjacency(log, bau);
    const std::vector<double> b = basal_rates(log, bau);
    out.rho = spectral_radius(a).rho;
    out.empty_graph = a.nnz() == 0;

    std::vector<std::uint64_t> spike_sends(log.n_users(), 0);
    {
        auto [first, last] = log.range(spike);
        auto events = log.events();
        for (std::size_t p = first; p < last; ++p) ++spike_sends[events[p].sender];
    }

    const std::size_t m = out.grid.size();
    out.rankings.resize(m);
    out.totals.assign(m, 0);
    parallel_for(m, 1, [&](std::size_t begin, std::size_t end) {
        for (std::size_t g = begin; g < end; ++g) {
            SteadyState s = steady_state(a, b, out.grid[g], out.rho, opts);
            out.rankings[g] = rank_users(s.x, r);
            std::uint64_t total = 0;
            for (const auto& e : out.rankings[g].entries) total += spike_sends[e.user];
            out.totals[g] = total;
        }
    });

    out.baseline = out.totals[0];
    out.deltas.resize(m);
    for (std::size_t g = 0; g < m; ++g) {
        out.deltas[g] = static_cast<std::int64_t>(out.totals[g]) - static_cast<std::int64_t>(out.baseline);
    }
    return out;
}

SpikeBounds detect_spike(std::span<const std::uint64_t> volume, double decay_factor) {
    if (volume.empty()) throw ArgumentError("detect_spike: empty volume series");
    if (!(decay_factor > 1.0)) throw ArgumentError("detect_spike: decay_factor must be > 1");
    SpikeBounds out;
    out.peak_bin = static_cast<std::size_t>(std::max_element(volume.begin(), volume.end()) - volume.begin());
    const double threshold = static_cast<double>(volume[out.peak_bin]) / decay_factor;
    out.end_bin = volume.size() - 1;
    for (std::size_t k = out.peak_bin + 1; k < volume.size(); ++k) {
        if (static_cast<double>(volume[k]) <= threshold) {
            out.end_bin = k;
            out.decayed = true;
            break;
        }
    }
    return out;
}

void write_ranking(std::ostream& out, const Ranking& ranking, const UserTable& users) {
    out << "rank,user,score\n";
    std::size_t rank = 1;
    for (const auto& e : ranking.entries) {
        out << rank++ << ',' << users.name(e.user) << ',' << format_shortest(e.score) << '\n';
    }
}

void write_sweep(std::ostream& out, const SweepResult& sweep) {
    out << "alpha_star,total,delta\n";
    char buf[32];
    for (std::size_t g = 0; g < sweep.grid.size(); ++g) {
        std::snprintf(buf, sizeof(buf), "%.6g", sweep.grid[g]);
        out << buf << ',' << sweep.totals[g] << ',' << sweep.deltas[g] << '\n';
    }
}

} // namespace spikerank
