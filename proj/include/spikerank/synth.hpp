#pragma once

#include "spikerank/event_log.hpp"
#include "spikerank/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace spikerank::synth {

/// Node i listens to its k nearest ring neighbours (k/2 on each side). k even, k < n.
struct KRegularRing {
    std::size_t k = 2;
};

/// Each ordered pair (i, j), i != j, is an edge independently with probability p.
struct ErdosRenyi {
    double p = 0.0;
};

/// The first `hubs` nodes listen to every other node and every other node
/// listens to every hub.
struct Star {
    std::size_t hubs = 1;
};

using Family = std::variant<KRegularRing, ErdosRenyi, Star>;

struct SynthConfig {
    Family family = KRegularRing{};
    std::size_t n = 10;
    double alpha_star_true = 0.5;
    // scale of the heavy-tailed basal probabilities (see basal_probabilities)
    double b_scale = 0.01;
    std::size_t bau_bins = 120;
    std::size_t spike_bins = 30;
    // fraction of nodes forced to send at spike onset
    double spike_boost = 0.5;
    double bin_width = 60.0;
    std::uint64_t seed = 1;
};

/// Throws ArgumentError for n < 2, alpha_star_true outside [0,1), p outside
/// [0,1], odd k or k >= n, hubs outside [1, n), and similar.
void validate(const SynthConfig& config);

/// Deterministic for a fixed seed.
SparseAdjacency generate_network(const SynthConfig& config);

/// b_i = min(1, b_scale / sqrt(u_i)) with u_i uniform on (0, 1]: Pareto(2)
/// weights with minimum b_scale, seeded.
std::vector<double> basal_probabilities(std::size_t n, double b_scale, std::uint64_t seed);

struct SpikeLog {
    EventLog log;
    Window bau;
    Window spike;
    double alpha = 0.0;
    double rho = 0.0;
    // user names are "u<node>"; log indices follow first appearance instead
    std::vector<std::uint64_t> sends_per_bin;
};

/// Runs the chain with b_prob and alpha = alpha_star_true / rho(A): bau_bins
/// unforced bins, then spike_bins bins whose first bin additionally forces a
/// uniformly chosen round(spike_boost * n) nodes to send. Every send by j in
/// bin k becomes one event j -> i for each listener i of j, all sharing one
/// timestamp drawn uniformly inside the bin.
SpikeLog generate_spike_log(const SparseAdjacency& a, std::span<const double> b_prob,
                            double alpha_star_true, std::size_t bau_bins, std::size_t spike_bins,
                            double spike_boost, std::uint64_t seed, double bin_width = 60.0);

/// generate_network + basal_probabilities + generate_spike_log from one config.
SpikeLog generate(const SynthConfig& config);

std::string node_name(std::size_t node);

/// Sidecar metadata as key=value lines.
void write_metadata(std::ostream& out, const SynthConfig& config, const SpikeLog& result);

std::string family_name(const Family& family);

} // namespace spikerank::synth
