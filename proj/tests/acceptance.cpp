// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "spikerank/dynamics.hpp"
#include "spikerank/errors.hpp"
#include "spikerank/graph.hpp"
#include "spikerank/ranking.hpp"
#include "spikerank/synth.hpp"

#include "cli_util.hpp"
#include "oracles.hpp"

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

using namespace spikerank;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1 -------------------------------------------------------------------------
Outcome solver_correctness() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int g = 0; g < 50; ++g) {
        std::size_t n = 2 + rng() % 199;
        auto dense = oracle::random_dense(n, 0.05 * oracle::unit(rng), rng);
        auto a = oracle::to_sparse(dense);
        std::vector<double> b(n);
        for (double& v : b) v = oracle::unit(rng);
        double rho = spectral_radius(a).rho;
        for (double as : {0.1, 0.5, 0.9}) {
            auto s = steady_state(a, b, as, rho);
            worst = std::max(worst, oracle::max_abs_diff(s.x, oracle::direct_solve(dense, s.alpha, b)));
        }
    }
    return {worst < 1e-10, "max |s - s_LU| = " + fmt("%.3g", worst) + " over 150 solves"};
}

// 2 -------------------------------------------------------------------------
Outcome spectral_radius_check() {
    std::mt19937_64 rng(202);
    double worst = 0.0, worst_bound = -1e300;
    for (int g = 0; g < 30; ++g) {
        std::size_t n = 2 + rng() % 29;
        auto dense = oracle::random_dense(n, 0.03 + 0.3 * oracle::unit(rng), rng);
        auto est = spectral_radius(oracle::to_sparse(dense));
        worst = std::max(worst, std::fabs(est.rho - oracle::max_modulus(dense)));
        double bound = static_cast<double>(std::min(est.max_in_degree, est.max_out_degree));
        worst_bound = std::max(worst_bound, est.rho - bound);
    }
    return {worst < 1e-8 && worst_bound <= 1e-8,
            "max |rho - eig| = " + fmt("%.3g", worst) + ", max(rho - degree bound) = " + fmt("%.3g", worst_bound)};
}

// 3 -------------------------------------------------------------------------
Outcome model_consistency() {
    std::mt19937_64 rng(303);
    std::size_t cells = 0, within = 0;
    const std::size_t steps = 8;
    const int seeds = 10000;
    for (int fixture = 0; fixture < 4; ++fixture) {
        std::size_t n = 8 + rng() % 13;
        auto a = oracle::to_sparse(oracle::random_dense(n, 0.15 + 0.15 * oracle::unit(rng), rng));
        double rho = spectral_radius(a).rho;
        auto dmax = std::max<std::size_t>(1, degree_bounds(a).max_in_degree);
        // b + alpha * A s <= 0.3 + 0.6 < 1 for every 0/1 state: clamping never fires
        double alpha = 0.6 / static_cast<double>(dmax);
        std::vector<double> b(n);
        for (double& v : b) v = 0.3 * oracle::unit(rng);
        ModelParams params{alpha, b, alpha * rho};
        std::vector<double> s0(n);
        for (double& v : s0) v = oracle::unit(rng) < 0.5 ? 1.0 : 0.0;

        Trajectory expect = expected_iteration(a, params, s0, steps);
        std::vector<double> sum(expect.states.size(), 0.0);
        for (int seed = 0; seed < seeds; ++seed) {
            Trajectory t = simulate(a, params, s0, steps, static_cast<std::uint64_t>(seed) + 1000u * fixture);
            for (std::size_t c = 0; c < sum.size(); ++c) sum[c] += t.states[c];
        }
        for (std::size_t c = n; c < sum.size(); ++c) { // row 0 is s0 itself
            double p = expect.states[c];
            double mean = sum[c] / seeds;
            double se = std::sqrt(p * (1.0 - p) / seeds);
            ++cells;
            if (std::fabs(mean - p) <= 3.0 * se + 1e-12) ++within;
        }
    }
    double frac = static_cast<double>(within) / static_cast<double>(cells);
    return {frac >= 0.99, std::to_string(within) + "/" + std::to_string(cells) + " cells within 3 SE (" +
                              fmt("%.4f", frac) + ")"};
}

// 4 -------------------------------------------------------------------------
Outcome katz_equivalence() {
    std::mt19937_64 rng(404);
    const double alpha = 0.2;
    double worst = 0.0;
    int accepted = 0, drawn = 0;
    while (accepted < 30) {
        ++drawn;
        std::size_t n = 2 + rng() % 7;
        auto dense = oracle::random_dense(n, 0.1 + 0.3 * oracle::unit(rng), rng);
        // the series is truncated at 20 terms; keep graphs whose tail is far below the tolerance
        if (alpha * oracle::max_modulus(dense) > 0.3) continue;
        ++accepted;
        auto k = katz_vector(oracle::to_sparse(dense), alpha);
        worst = std::max(worst, oracle::max_abs_diff(k, oracle::walk_sum(dense, alpha, 20)));
    }
    return {worst < 1e-9, "max |katz - walk sum| = " + fmt("%.3g", worst) + " over 30 graphs (" +
                              std::to_string(drawn - accepted) + " with alpha*rho > 0.3 redrawn)"};
}

// 5 -------------------------------------------------------------------------
Outcome half_life_theory() {
    synth::SynthConfig config;
    config.family = synth::KRegularRing{8};
    config.n = 200;
    auto a = synth::generate_network(config);
    double lambda1 = spectral_radius(a).rho;
    std::vector<double> ones(200, 1.0), zero(200, 0.0);
    bool ok = true;
    std::string detail;
    for (double as : {0.5, 0.8}) {
        ModelParams params = ModelParams::from_alpha_star(as, lambda1, zero);
        double theory = half_life(params.alpha, 8.0);

        Trajectory e = expected_iteration(a, params, ones, 20);
        double fit_e = fit_decay(e.total_per_step).half_life;

        std::vector<double> ensemble(41, 0.0);
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            Trajectory t = simulate(a, params, ones, 40, seed);
            for (std::size_t k = 0; k <= 40; ++k) ensemble[k] += t.total_per_step[k];
        }
        // fit while the ensemble still has at least 100 sends per step
        std::vector<double> segment;
        for (double v : ensemble) {
            if (v < 100.0) break;
            segment.push_back(v);
        }
        double fit_s = segment.size() >= 3 ? fit_decay(segment).half_life : NAN;
        double err_e = std::fabs(fit_e / theory - 1.0);
        double err_s = std::fabs(fit_s / theory - 1.0);
        ok = ok && err_e < 0.01 && err_s < 0.10;
        detail += "a*=" + fmt("%.1f", as) + ": theory " + fmt("%.4f", theory) + ", expected " + fmt("%.4f", fit_e) +
                  ", simulated " + fmt("%.4f", fit_s) + " (" + std::to_string(segment.size()) + " steps); ";
    }
    return {ok, detail};
}

// 6 + 7 ---------------------------------------------------------------------
struct SweepStudy {
    bool baseline_ok = true;
    std::size_t fixtures = 0;
    std::vector<double> grid;
    std::vector<double> mean_delta;
};

bool baseline_identity(const synth::SpikeLog& g, const SweepResult& sweep, std::size_t r) {
    return sweep.grid.front() == 0.0 && sweep.deltas.front() == 0 &&
           sweep.rankings.front().entries == rank_users(basal_rates(g.log, g.bau), r).entries &&
           sweep.totals.front() == sweep.baseline;
}

SweepStudy sweep_study() {
    SweepStudy out;
    out.grid = default_grid();
    out.mean_delta.assign(out.grid.size(), 0.0);
    const int seeds = 10;
    const std::size_t r = 100;
    for (int seed = 1; seed <= seeds; ++seed) {
        synth::SynthConfig c;
        c.family = synth::ErdosRenyi{0.005};
        c.n = 2000;
        c.alpha_star_true = 0.5;
        c.b_scale = 0.002;
        c.bau_bins = 120;
        c.spike_bins = 30;
        c.spike_boost = 0.1;
        c.seed = static_cast<std::uint64_t>(seed);
        auto g = synth::generate(c);
        auto sweep = evaluate_spike(g.log, g.bau, g.spike, out.grid, r);
        out.baseline_ok = out.baseline_ok && baseline_identity(g, sweep, r);
        ++out.fixtures;
        for (std::size_t i = 0; i < sweep.grid.size(); ++i) out.mean_delta[i] += static_cast<double>(sweep.deltas[i]) / seeds;
    }
    // a few smaller fixtures from other families
    for (int f = 0; f < 3; ++f) {
        synth::SynthConfig c;
        c.n = 300;
        if (f == 0) c.family = synth::KRegularRing{6};
        if (f == 1) c.family = synth::Star{3};
        if (f == 2) c.family = synth::ErdosRenyi{0.02};
        c.b_scale = 0.005;
        c.seed = 50u + static_cast<std::uint64_t>(f);
        auto g = synth::generate(c);
        auto sweep = evaluate_spike(g.log, g.bau, g.spike, std::vector<double>{0.3, 0.7}, 20);
        out.baseline_ok = out.baseline_ok && baseline_identity(g, sweep, 20);
        ++out.fixtures;
    }
    return out;
}

// 8 -------------------------------------------------------------------------
Outcome responsiveness_oracle() {
    std::mt19937_64 rng(808);
    int equal = 0;
    const int logs = 25;
    for (int l = 0; l < logs; ++l) {
        bool integral = l % 2 == 0;
        auto records = oracle::random_records(100 + rng() % 1901, 5 + rng() % 60, 500.0 + oracle::unit(rng) * 5000.0,
                                              rng, integral);
        EventLog log = EventLog::from_records(records);
        double width = integral ? 60.0 : 10.0 + oracle::unit(rng) * 90.0;
        double lookback = integral ? 60.0 : 1.0 + oracle::unit(rng) * 300.0;
        if (responsiveness(log, width, lookback) == oracle::responsiveness_pairs(log, width, lookback)) ++equal;
    }
    return {equal == logs, std::to_string(equal) + "/" + std::to_string(logs) + " logs identical to the pair scan"};
}

// 9 -------------------------------------------------------------------------
Outcome cli_determinism() {
    cli::TempDir dir;
    std::vector<std::string> runs;
    auto log = cli::q(dir / "log.csv");
    std::string w = " --bau-start 0 --bau-end 60 ";
    std::vector<std::pair<std::string, std::string>> commands{
        {"synth", "synth --family er --n 300 --p 0.02 --bau-bins 60 --spike-bins 20 --seed 7 --out "},
        {"volume", "volume --input " + log + " --out "},
        {"rank", "rank --input " + log + w + "--alpha-star 0.6 --top 25 --out "},
        {"sweep", "sweep --input " + log + w + "--spike-start 60 --spike-end 80 --top 25 --out "},
        {"simulate", "simulate --input " + log + w + "--alpha-star 0.6 --steps 30 --seed 3 --basal-scale 0.0005 --out "},
        {"expected", "simulate --mode expected --input " + log + w + "--alpha-star 0.6 --steps 30 --basal-scale 0.0005 --out "},
        {"responsiveness", "responsiveness --input " + log + " --out "},
        {"halflife", "halflife --input " + log + " --out "},
    };
    // the synth output doubles as every other command's input
    if (cli::run(commands[0].second + log) != 0) return {false, "synth failed"};
    int identical = 0;
    std::string failed;
    for (const auto& [name, cmd] : commands) {
        auto a = dir / (name + ".1");
        auto b = dir / (name + ".2");
        bool ok = cli::run(cmd + cli::q(a)) == 0 && cli::run(cmd + cli::q(b)) == 0 &&
                  cli::slurp(a) == cli::slurp(b) && !cli::slurp(a).empty();
        if (name == "synth") ok = ok && cli::slurp(dir / (name + ".1.meta")) == cli::slurp(dir / (name + ".2.meta"));
        if (ok) ++identical;
        else failed += " " + name;
    }
    return {identical == static_cast<int>(commands.size()),
            std::to_string(identical) + "/" + std::to_string(commands.size()) + " subcommands byte identical" +
                (failed.empty() ? "" : " (differ:" + failed + ")")};
}

// 10 ------------------------------------------------------------------------
Outcome scale_smoke() {
    const std::size_t users = 100000, events = 1000000;
    cli::TempDir dir;
    auto path = dir / "big.csv";
    {
        // heavy-tailed senders, every user present at least once
        std::mt19937_64 rng(1010);
        std::ofstream f(path, std::ios::binary);
        f << "time,sender,receiver\n";
        std::string line;
        for (std::size_t e = 0; e < events; ++e) {
            std::size_t s = e < users ? e : static_cast<std::size_t>(users * std::pow(oracle::unit(rng), 3.0));
            std::size_t r = rng() % users;
            double t = std::floor(oracle::unit(rng) * 86400.0 * 1000.0) / 1000.0;
            f << format_shortest(t) << ",user" << s << ",user" << r << '\n';
        }
    }
    auto out = dir / "rank.csv";
    auto t0 = std::chrono::steady_clock::now();
    int status = cli::run("rank --input " + cli::q(path) + " --bau-start 0 --bau-end 1440 --alpha-star 0.5 --out " +
                          cli::q(out));
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rusage usage{};
    getrusage(RUSAGE_CHILDREN, &usage);
    double gib = static_cast<double>(usage.ru_maxrss) / (1024.0 * 1024.0); // ru_maxrss is KiB on Linux
    std::string ranking = cli::slurp(out);
    bool ok = status == 0 && std::count(ranking.begin(), ranking.end(), '\n') == 101 && seconds < 60.0 && gib < 2.0;
    return {ok, "exit " + std::to_string(status) + ", " + fmt("%.2f", seconds) + " s, peak RSS " + fmt("%.3f", gib) +
                    " GiB (largest child so far)"};
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " " << name << ": " << o.detail << std::endl;
        if (!o.pass) ++failures;
    };

    report(1, "solver correctness", solver_correctness);
    report(2, "spectral radius", spectral_radius_check);
    report(3, "model consistency", model_consistency);
    report(4, "katz equivalence", katz_equivalence);
    report(5, "half-life theory", half_life_theory);

    SweepStudy fig;
    std::string fig_error;
    try {
        fig = sweep_study();
    } catch (const std::exception& e) {
        fig_error = e.what();
        fig.baseline_ok = false;
    }
    report(6, "baseline identity", [&] {
        return Outcome{fig.baseline_ok && fig_error.empty(),
                       fig_error.empty() ? std::to_string(fig.fixtures) + " fixtures" : "exception: " + fig_error};
    });
    report(7, "spike evaluation sweep", [&] {
        if (!fig_error.empty()) return Outcome{false, "exception: " + fig_error};
        std::ostringstream curve;
        double best = -1e300, best_at = 0.0;
        std::size_t positive = 0;
        for (std::size_t i = 1; i < fig.grid.size(); ++i) {
            if (fig.mean_delta[i] > best) {
                best = fig.mean_delta[i];
                best_at = fig.grid[i];
            }
            if (fig.mean_delta[i] > 0.0) ++positive;
        }
        std::cout << "  alpha_star,mean_delta\n";
        for (std::size_t i = 0; i < fig.grid.size(); ++i) {
            std::cout << "  " << fmt("%.3g", fig.grid[i]) << ',' << fmt("%.1f", fig.mean_delta[i]) << '\n';
        }
        curve << "best mean delta " << fmt("%.1f", best) << " at alpha*=" << fmt("%.3g", best_at) << "; " << positive
              << "/" << fig.grid.size() - 1 << " positive grid points";
        return Outcome{best > 0.0, curve.str()};
    });
    report(8, "responsiveness oracle", responsiveness_oracle);
    report(9, "cli determinism", cli_determinism);
    report(10, "scale smoke test", scale_smoke);

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
