// spikerank: command-line front end.
//
// Every subcommand renders its CSV into memory and only then writes the
// output file (via a temporary and rename), so no partial files are left on
// error. Exit status: 0 success, 1 data/runtime error, 2 usage error.

#include "spikerank/dynamics.hpp"
#include "spikerank/errors.hpp"
#include "spikerank/event_log.hpp"
#include "spikerank/graph.hpp"
#include "spikerank/ranking.hpp"
#include "spikerank/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace spikerank;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string input;
    std::string out = "-";
    double bin = 60.0;
    std::optional<double> bau_start, bau_end, spike_start, spike_end; // minutes
    double alpha_star = 0.5;
    std::string grid;
    std::size_t top = 100;
    double decay_factor = 4.0;
    std::uint64_t seed = 1;
};

void emit(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot open output file " + tmp.string());
        f << content;
        f.close();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    fs::rename(tmp, target);
}

EventLog load_log(const std::string& path) {
    if (path.empty()) throw UsageError("--input is required");
    if (path == "-") return parse_events(std::cin);
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open input file " + path);
    return parse_events(f);
}

double minutes(const std::optional<double>& m, const char* flag) {
    if (!m) throw UsageError(std::string(flag) + " is required");
    if (!std::isfinite(*m) || *m < 0.0) throw UsageError(std::string(flag) + " must be a non-negative number of minutes");
    return *m * 60.0;
}

Window window_from(const std::optional<double>& start, const std::optional<double>& end,
                   const char* start_flag, const char* end_flag) {
    Window w{minutes(start, start_flag), minutes(end, end_flag)};
    if (!(w.start < w.end)) {
        throw UsageError(std::string(start_flag) + " must be < " + end_flag);
    }
    return w;
}

void check_alpha_star(double a) {
    if (!(a >= 0.0) || !(a < 1.0)) throw UsageError("--alpha-star must satisfy 0 <= alpha_star < 1");
}

void check_bin(double bin) {
    if (!(bin > 0.0) || !std::isfinite(bin)) throw UsageError("--bin must be > 0 seconds");
}

std::vector<double> parse_list(const std::string& text, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(std::string(flag) + ": not a number: '" + item + "'");
        }
    }
    return out;
}

std::string csv_number(double v) { return format_shortest(v); }

// --- subcommands -----------------------------------------------------------

void cmd_volume(const Common& c) {
    check_bin(c.bin);
    EventLog log = load_log(c.input);
    auto volume = volume_series(log, c.bin);
    std::ostringstream os;
    os << "bin,volume\n";
    for (std::size_t k = 0; k < volume.size(); ++k) os << k << ',' << volume[k] << '\n';
    emit(c.out, os.str());
}

void cmd_rank(const Common& c, const std::string& adjacency_out) {
    check_alpha_star(c.alpha_star);
    if (c.top < 1) throw UsageError("--top must be >= 1");
    Window bau = window_from(c.bau_start, c.bau_end, "--bau-start", "--bau-end");
    EventLog log = load_log(c.input);

    std::vector<double> b = basal_rates(log, bau);
    SparseAdjacency a = build_adjacency(log, bau);
    SpectralEstimate est = spectral_radius(a);
    SteadyState s = steady_state(a, b, c.alpha_star, est.rho);
    Ranking ranking = rank_users(s.x, c.top);

    std::ostringstream os;
    write_ranking(os, ranking, log.users());
    if (!adjacency_out.empty()) {
        std::ostringstream adj;
        write_adjacency(adj, a, &log.users());
        emit(adjacency_out, adj.str());
    }
    emit(c.out, os.str());
}

void cmd_sweep(const Common& c) {
    if (c.top < 1) throw UsageError("--top must be >= 1");
    Window bau = window_from(c.bau_start, c.bau_end, "--bau-start", "--bau-end");
    Window spike = window_from(c.spike_start, c.spike_end, "--spike-start", "--spike-end");
    if (bau.end > spike.start) throw UsageError("--bau-end must be <= --spike-start");
    std::vector<double> grid = c.grid.empty() ? default_grid() : parse_list(c.grid, "--grid");
    for (double g : grid) {
        if (!(g >= 0.0) || !(g < 1.0)) throw UsageError("--grid values must satisfy 0 <= alpha_star < 1");
    }
    EventLog log = load_log(c.input);
    SweepResult sweep = evaluate_spike(log, bau, spike, grid, c.top);
    if (sweep.empty_graph) std::cerr << "warning: no edges in the bau window; all rankings are basal\n";
    std::ostringstream os;
    write_sweep(os, sweep);
    emit(c.out, os.str());
}

struct SimulateOptions {
    std::size_t steps = 60;
    double initial_fraction = 1.0;
    std::optional<double> basal_scale;
    std::string mode = "stochastic";
    std::string per_node;
};

void cmd_simulate(const Common& c, const SimulateOptions& o) {
    check_alpha_star(c.alpha_star);
    check_bin(c.bin);
    if (o.steps < 1) throw UsageError("--steps must be >= 1");
    if (!(o.initial_fraction >= 0.0 && o.initial_fraction <= 1.0)) {
        throw UsageError("--initial-fraction must lie in [0, 1]");
    }
    if (o.mode != "stochastic" && o.mode != "expected") throw UsageError("--mode must be stochastic or expected");
    Window bau = window_from(c.bau_start, c.bau_end, "--bau-start", "--bau-end");
    EventLog log = load_log(c.input);

    SparseAdjacency a = build_adjacency(log, bau);
    std::vector<double> b = basal_rates(log, bau);
    double scale = o.basal_scale ? *o.basal_scale : 1.0 / std::ceil((bau.end - bau.start) / c.bin);
    if (!(scale >= 0.0)) throw UsageError("--basal-scale must be >= 0");
    for (double& v : b) {
        v *= scale;
        if (v > 1.0) throw UsageError("--basal-scale gives a basal probability above 1; reduce it");
    }
    ModelParams params = ModelParams::from_alpha_star(c.alpha_star, spectral_radius(a).rho, std::move(b));

    const std::size_t n = a.n();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::mt19937_64 rng(c.seed);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> s0(n, 0.0);
    auto active = static_cast<std::size_t>(std::llround(o.initial_fraction * static_cast<double>(n)));
    for (std::size_t p = 0; p < active; ++p) s0[order[p]] = 1.0;

    Trajectory t = o.mode == "expected" ? expected_iteration(a, params, s0, o.steps)
                                        : simulate(a, params, s0, o.steps, c.seed);
    std::ostringstream os;
    os << "step,total\n";
    for (std::size_t k = 0; k <= t.steps; ++k) os << k << ',' << csv_number(t.total_per_step[k]) << '\n';

    if (!o.per_node.empty()) {
        std::ostringstream wide;
        wide << "step";
        for (std::size_t i = 0; i < n; ++i) wide << ',' << log.users().name(static_cast<UserIndex>(i));
        wide << '\n';
        for (std::size_t k = 0; k <= t.steps; ++k) {
            wide << k;
            for (double v : t.state(k)) wide << ',' << csv_number(v);
            wide << '\n';
        }
        emit(o.per_node, wide.str());
    }
    emit(c.out, os.str());
}

struct SynthOptions {
    std::string family = "ring";
    std::size_t n = 200;
    std::size_t k = 8;
    double p = 0.01;
    std::size_t hubs = 1;
    double b_scale = 0.01;
    std::size_t bau_bins = 120;
    std::size_t spike_bins = 30;
    double spike_boost = 0.5;
};

void cmd_synth(const Common& c, const SynthOptions& o) {
    if (c.out.empty() || c.out == "-") throw UsageError("synth requires --out (the metadata goes to <out>.meta)");
    check_alpha_star(c.alpha_star);
    check_bin(c.bin);
    synth::SynthConfig config;
    if (o.family == "ring") {
        config.family = synth::KRegularRing{o.k};
    } else if (o.family == "er") {
        config.family = synth::ErdosRenyi{o.p};
    } else if (o.family == "star") {
        config.family = synth::Star{o.hubs};
    } else {
        throw UsageError("--family must be ring, er or star");
    }
    config.n = o.n;
    config.alpha_star_true = c.alpha_star;
    config.b_scale = o.b_scale;
    config.bau_bins = o.bau_bins;
    config.spike_bins = o.spike_bins;
    config.spike_boost = o.spike_boost;
    config.bin_width = c.bin;
    config.seed = c.seed;
    try {
        synth::validate(config);
    } catch (const ArgumentError& e) {
        throw UsageError(e.what());
    }

    synth::SpikeLog result = synth::generate(config);
    std::ostringstream events, meta;
    write_events(events, result.log);
    synth::write_metadata(meta, config, result);
    emit(c.out, events.str());
    emit(c.out + ".meta", meta.str());
}

void cmd_responsiveness(const Common& c, double lookback) {
    check_bin(c.bin);
    if (!(lookback > 0.0)) throw UsageError("--lookback must be > 0 seconds");
    EventLog log = load_log(c.input);
    auto resp = responsiveness(log, c.bin, lookback);
    std::ostringstream os;
    os << "bin,responsiveness\n";
    for (std::size_t k = 0; k < resp.size(); ++k) {
        os << k << ',';
        if (resp[k]) os << csv_number(*resp[k]);
        os << '\n';
    }
    emit(c.out, os.str());
}

struct HalflifeOptions {
    std::optional<double> alpha;
    std::optional<double> lambda1;
    std::string volume;
};

void cmd_halflife(const Common& c, const HalflifeOptions& o) {
    std::ostringstream os;
    os << "mode,gamma,half_life,decaying,first_bin,last_bin\n";
    if (o.alpha || o.lambda1) {
        if (!o.alpha || !o.lambda1) throw UsageError("--alpha and --lambda1 must be given together");
        double gamma = *o.alpha * *o.lambda1;
        if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("alpha * lambda1 must satisfy 0 < gamma < 1");
        os << "theory," << csv_number(gamma) << ',' << csv_number(half_life(*o.alpha, *o.lambda1))
           << ",1,,\n";
        emit(c.out, os.str());
        return;
    }

    std::vector<double> segment;
    std::size_t first = 0;
    if (!o.volume.empty()) {
        segment = parse_list(o.volume, "--volume");
    } else {
        check_bin(c.bin);
        if (!(c.decay_factor > 1.0)) throw UsageError("--decay-factor must be > 1");
        EventLog log = load_log(c.input);
        auto volume = volume_series(log, c.bin);
        if (volume.empty()) throw std::runtime_error("empty log: no volume to fit");
        SpikeBounds spike = detect_spike(volume, c.decay_factor);
        if (!spike.decayed) std::cerr << "warning: volume never decayed by the requested factor\n";
        first = spike.peak_bin;
        for (std::size_t k = spike.peak_bin; k <= spike.end_bin; ++k) {
            segment.push_back(static_cast<double>(volume[k]));
        }
    }
    if (segment.size() < 3) throw UsageError("fit mode needs a segment of at least 3 bins");
    for (double v : segment) {
        if (!(v > 0.0)) throw UsageError("fit mode needs every bin in the segment to be > 0");
    }
    DecayFit fit = fit_decay(segment);
    os << "fit," << csv_number(fit.gamma) << ',' << csv_number(fit.half_life) << ','
       << (fit.decaying ? 1 : 0) << ',' << first << ',' << first + segment.size() - 1 << '\n';
    if (!fit.decaying) std::cerr << "warning: fitted series does not decay\n";
    emit(c.out, os.str());
}

void add_io(CLI::App* sub, Common& c, bool needs_input = true) {
    if (needs_input) sub->add_option("--input", c.input, "Event CSV (time,sender,receiver); - for stdin");
    sub->add_option("--out", c.out, "Output CSV path; - for stdout");
}

void add_bau(CLI::App* sub, Common& c) {
    sub->add_option("--bau-start", c.bau_start, "Business-as-usual window start (minutes)");
    sub->add_option("--bau-end", c.bau_end, "Business-as-usual window end (minutes)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spikerank: predict the most active users of a messaging network during an activity spike"};
    app.require_subcommand(1);

    Common c;
    SimulateOptions sim;
    SynthOptions syn;
    HalflifeOptions hl;
    std::string adjacency_out;
    double lookback = 60.0;

    auto* volume = app.add_subcommand("volume", "Sends per time bin");
    add_io(volume, c);
    volume->add_option("--bin", c.bin, "Bin width in seconds")->capture_default_str();

    auto* rank = app.add_subcommand("rank", "Rank users by steady-state activity");
    add_io(rank, c);
    add_bau(rank, c);
    rank->add_option("--alpha-star", c.alpha_star, "Normalized response rate in [0, 1)")->capture_default_str();
    rank->add_option("--top", c.top, "Number of users to report")->capture_default_str();
    rank->add_option("--adjacency-out", adjacency_out, "Also write the bau adjacency (receiver,sender) CSV");
    rank->add_option("--bin", c.bin, "Bin width in seconds (accepted for uniformity; not used)");

    auto* sweep = app.add_subcommand("sweep", "Spike activity of the predicted top r across alpha_star");
    add_io(sweep, c);
    add_bau(sweep, c);
    sweep->add_option("--spike-start", c.spike_start, "Spike window start (minutes)");
    sweep->add_option("--spike-end", c.spike_end, "Spike window end (minutes)");
    sweep->add_option("--grid", c.grid, "Comma-separated alpha_star values (default: 0 plus 25 log-spaced)");
    sweep->add_option("--top", c.top, "Cohort size r")->capture_default_str();
    sweep->add_option("--bin", c.bin, "Bin width in seconds (accepted for uniformity; not used)");

    auto* simulate_cmd = app.add_subcommand("simulate", "Run the chain (or its expectation) on the bau network");
    add_io(simulate_cmd, c);
    add_bau(simulate_cmd, c);
    simulate_cmd->add_option("--alpha-star", c.alpha_star, "Normalized response rate in [0, 1)")->capture_default_str();
    simulate_cmd->add_option("--steps", sim.steps, "Number of transitions")->capture_default_str();
    simulate_cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    simulate_cmd->add_option("--bin", c.bin, "Bin width in seconds")->capture_default_str();
    simulate_cmd->add_option("--initial-fraction", sim.initial_fraction, "Fraction of users active at step 0")
        ->capture_default_str();
    simulate_cmd->add_option("--basal-scale", sim.basal_scale,
                             "Factor turning bau send counts into per-bin probabilities (default 1 / bau bins)");
    simulate_cmd->add_option("--mode", sim.mode, "stochastic or expected")->capture_default_str();
    simulate_cmd->add_option("--per-node", sim.per_node, "Also write the wide per-node state CSV");

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic spike event log");
    add_io(synth_cmd, c, false);
    synth_cmd->add_option("--family", syn.family, "ring, er or star")->capture_default_str();
    synth_cmd->add_option("--n", syn.n, "Number of users")->capture_default_str();
    synth_cmd->add_option("--k", syn.k, "Ring degree (even)")->capture_default_str();
    synth_cmd->add_option("--p", syn.p, "Erdos-Renyi edge probability")->capture_default_str();
    synth_cmd->add_option("--hubs", syn.hubs, "Star hub count")->capture_default_str();
    synth_cmd->add_option("--alpha-star", c.alpha_star, "True normalized response rate")->capture_default_str();
    synth_cmd->add_option("--b-scale", syn.b_scale, "Basal probability scale")->capture_default_str();
    synth_cmd->add_option("--bau-bins", syn.bau_bins, "Business-as-usual bins")->capture_default_str();
    synth_cmd->add_option("--spike-bins", syn.spike_bins, "Spike bins")->capture_default_str();
    synth_cmd->add_option("--spike-boost", syn.spike_boost, "Fraction forced active at onset")->capture_default_str();
    synth_cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--bin", c.bin, "Bin width in seconds")->capture_default_str();

    auto* resp = app.add_subcommand("responsiveness", "Mean messages received before each send, per bin");
    add_io(resp, c);
    resp->add_option("--bin", c.bin, "Bin width in seconds")->capture_default_str();
    resp->add_option("--lookback", lookback, "Lookback window in seconds")->capture_default_str();

    auto* halflife_cmd = app.add_subcommand("halflife", "Spike half-life from (alpha, lambda1) or a fitted decay");
    add_io(halflife_cmd, c);
    halflife_cmd->add_option("--alpha", hl.alpha, "Response rate alpha");
    halflife_cmd->add_option("--lambda1", hl.lambda1, "Perron-Frobenius eigenvalue of A");
    halflife_cmd->add_option("--volume", hl.volume, "Comma-separated decay segment to fit");
    halflife_cmd->add_option("--bin", c.bin, "Bin width in seconds")->capture_default_str();
    halflife_cmd->add_option("--decay-factor", c.decay_factor, "Spike end: volume <= peak / factor")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*volume) cmd_volume(c);
        else if (*rank) cmd_rank(c, adjacency_out);
        else if (*sweep) cmd_sweep(c);
        else if (*simulate_cmd) cmd_simulate(c, sim);
        else if (*synth_cmd) cmd_synth(c, syn);
        else if (*resp) cmd_responsiveness(c, lookback);
        else if (*halflife_cmd) cmd_halflife(c, hl);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
