#include "spikerank/synth.hpp"

#include "spikerank/dynamics.hpp"
#include "spikerank/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

namespace spikerank::synth {

namespace {

// Independent streams for the network, the basal rates and the chain.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

std::string node_name(std::size_t node) { return "u" + std::to_string(node); }

std::string family_name(const Family& family) {
    return std::visit(Overloaded{
                          [](const KRegularRing& f) { return "k_regular_ring(k=" + std::to_string(f.k) + ")"; },
                          [](const ErdosRenyi& f) { return "erdos_renyi(p=" + format_shortest(f.p) + ")"; },
                          [](const Star& f) { return "star(hubs=" + std::to_string(f.hubs) + ")"; },
                      },
                      family);
}

void validate(const SynthConfig& c) {
    if (c.n < 2) throw ArgumentError("synth: n must be >= 2");
    if (!(c.alpha_star_true >= 0.0 && c.alpha_star_true < 1.0)) {
        throw ArgumentError("synth: alpha_star_true must lie in [0, 1)");
    }
    if (!(c.b_scale >= 0.0 && c.b_scale <= 1.0)) throw ArgumentError("synth: b_scale must lie in [0, 1]");
    if (!(c.spike_boost >= 0.0 && c.spike_boost <= 1.0)) {
        throw ArgumentError("synth: spike_boost must lie in [0, 1]");
    }
    if (!(c.bin_width > 0.0)) throw ArgumentError("synth: bin_width must be > 0");
    if (c.spike_bins < 1) throw ArgumentError("synth: spike_bins must be >= 1");
    std::visit(Overloaded{
                   [&](const KRegularRing& f) {
                       if (f.k < 2 || f.k % 2 != 0) throw ArgumentError("synth: ring k must be even and >= 2");
                       if (f.k >= c.n) throw ArgumentError("synth: ring k must be < n");
                   },
                   [&](const ErdosRenyi& f) {
                       if (!(f.p >= 0.0 && f.p <= 1.0)) throw ArgumentError("synth: p must lie in [0, 1]");
                   },
                   [&](const Star& f) {
                       if (f.hubs < 1 || f.hubs >= c.n) throw ArgumentError("synth: hubs must lie in [1, n)");
                   },
               },
               c.family);
}

SparseAdjacency generate_network(const SynthConfig& config) {
    validate(config);
    const std::size_t n = config.n;
    std::vector<std::pair<UserIndex, UserIndex>> edges;

    std::visit(Overloaded{
                   [&](const KRegularRing& f) {
                       edges.reserve(n * f.k);
                       for (std::size_t i = 0; i < n; ++i) {
                           for (std::size_t d = 1; d <= f.k / 2; ++d) {
                               edges.emplace_back(i, (i + d) % n);
                               edges.emplace_back(i, (i + n - d) % n);
                           }
                       }
                   },
                   [&](const ErdosRenyi& f) {
                       // geometric skipping over the n(n-1) off-diagonal slots
                       if (f.p <= 0.0) return;
                       std::mt19937_64 rng(derive_seed(config.seed, 0));
                       const std::uint64_t slots = static_cast<std::uint64_t>(n) * (n - 1);
                       const double log_q = std::log1p(-f.p);
                       std::uint64_t slot = 0;
                       while (true) {
                           if (f.p < 1.0) {
                               double u = unit_draw(rng);
                               double skip = std::floor(std::log1p(-u) / log_q);
                               if (skip >= static_cast<double>(slots - slot)) break;
                               slot += static_cast<std::uint64_t>(skip);
                           }
                           if (slot >= slots) break;
                           std::uint64_t i = slot / (n - 1);
                           std::uint64_t c = slot % (n - 1);
                           std::uint64_t j = c < i ? c : c + 1;
                           edges.emplace_back(static_cast<UserIndex>(i), static_cast<UserIndex>(j));
                           ++slot;
                       }
                   },
                   [&](const Star& f) {
                       for (std::size_t h = 0; h < f.hubs; ++h) {
                           for (std::size_t v = 0; v < n; ++v) {
                               if (v == h) continue;
                               edges.emplace_back(h, v);
                               edges.emplace_back(v, h);
                           }
                       }
                   },
               },
               config.family);
    return SparseAdjacency::from_edges(n, edges);
}

std::vector<double> basal_probabilities(std::size_t n, double b_scale, std::uint64_t seed) {
    std::mt19937_64 rng(derive_seed(seed, 1));
    std::vector<double> b(n);
    for (double& v : b) {
        double u = 1.0 - unit_draw(rng); // (0, 1]
        v = std::min(1.0, b_scale / std::sqrt(u));
    }
    return b;
}

SpikeLog generate_spike_log(const SparseAdjacency& a, std::span<const double> b_prob,
                            double alpha_star_true, std::size_t bau_bins, std::size_t spike_bins,
                            double spike_boost, std::uint64_t seed, double bin_width) {
    const std::size_t n = a.n();
    if (b_prob.size() != n) throw ArgumentError("generate_spike_log: b_prob length must equal n");
    for (double v : b_prob) {
        if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("generate_spike_log: b_prob must lie in [0, 1]");
    }
    if (!(alpha_star_true >= 0.0 && alpha_star_true < 1.0)) {
        throw ArgumentError("generate_spike_log: alpha_star_true must lie in [0, 1)");
    }
    if (!(spike_boost >= 0.0 && spike_boost <= 1.0)) {
        throw ArgumentError("generate_spike_log: spike_boost must lie in [0, 1]");
    }
    if (spike_bins < 1) throw ArgumentError("generate_spike_log: spike_bins must be >= 1");
    if (!(bin_width > 0.0)) throw ArgumentError("generate_spike_log: bin_width must be > 0");

    SpikeLog out;
    out.rho = spectral_radius(a).rho;
    ModelParams params = ModelParams::from_alpha_star(alpha_star_true, out.rho,
                                                      std::vector<double>(b_prob.begin(), b_prob.end()));
    out.alpha = params.alpha;
    const SparseAdjacency listeners = a.transpose();

    std::vector<std::string> names(n);
    for (std::size_t v = 0; v < n; ++v) names[v] = node_name(v);

    std::mt19937_64 rng(derive_seed(seed, 2));
    std::vector<double> state(n, 0.0);
    std::vector<std::uint32_t> order(n);
    std::vector<EventRecord> records;
    const std::size_t total_bins = bau_bins + spike_bins;
    const auto forced_count = static_cast<std::size_t>(std::llround(spike_boost * static_cast<double>(n)));
    out.sends_per_bin.assign(total_bins, 0);

    for (std::size_t k = 0; k < total_bins; ++k) {
        std::vector<double> p = step_probabilities(a, params, state);
        for (std::size_t i = 0; i < n; ++i) state[i] = unit_draw(rng) < p[i] ? 1.0 : 0.0;

        if (k == bau_bins && forced_count > 0) {
            // partial Fisher-Yates picks the forced senders
            std::iota(order.begin(), order.end(), 0u);
            for (std::size_t f = 0; f < forced_count; ++f) {
                std::size_t pick = f + static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n - f));
                pick = std::min(pick, n - 1);
                std::swap(order[f], order[pick]);
                state[order[f]] = 1.0;
            }
        }

        const double bin_start = static_cast<double>(k) * bin_width;
        const double bin_end = static_cast<double>(k + 1) * bin_width;
        for (std::size_t j = 0; j < n; ++j) {
            if (state[j] == 0.0) continue;
            ++out.sends_per_bin[k];
            double t = bin_start + unit_draw(rng) * bin_width;
            if (!(t < bin_end)) t = std::nextafter(bin_end, bin_start);
            for (std::uint32_t i : listeners.row(j)) records.push_back({t, names[j], names[i]});
        }
    }

    out.log = EventLog::from_records(records);
    out.bau = {0.0, static_cast<double>(bau_bins) * bin_width};
    out.spike = {static_cast<double>(bau_bins) * bin_width, static_cast<double>(total_bins) * bin_width};
    return out;
}

SpikeLog generate(const SynthConfig& config) {
    SparseAdjacency a = generate_network(config);
    std::vector<double> b = basal_probabilities(config.n, config.b_scale, config.seed);
    return generate_spike_log(a, b, config.alpha_star_true, config.bau_bins, config.spike_bins,
                              config.spike_boost, config.seed, config.bin_width);
}

void write_metadata(std::ostream& out, const SynthConfig& config, const SpikeLog& result) {
    out << "family=" << family_name(config.family) << '\n'
        << "n=" << config.n << '\n'
        << "seed=" << config.seed << '\n'
        << "alpha_star=" << format_shortest(config.alpha_star_true) << '\n'
        << "alpha=" << format_shortest(result.alpha) << '\n'
        << "rho=" << format_shortest(result.rho) << '\n'
        << "b_scale=" << format_shortest(config.b_scale) << '\n'
        << "spike_boost=" << format_shortest(config.spike_boost) << '\n'
        << "bin_width=" << format_shortest(config.bin_width) << '\n'
        << "bau_start=" << format_shortest(result.bau.start) << '\n'
        << "bau_end=" << format_shortest(result.bau.end) << '\n'
        << "spike_start=" << format_shortest(result.spike.start) << '\n'
        << "spike_end=" << format_shortest(result.spike.end) << '\n'
        << "events=" << result.log.size() << '\n';
}

} // namespace spikerank::synth
