#include "spikerank/dynamics.hpp"

#include "spikerank/errors.hpp"
#include "spikerank/event_log.hpp"
#include "spikerank/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace spikerank {

namespace {

void check_length(std::span<const double> v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw ArgumentError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                            std::to_string(v.size()));
    }
}

void check_params(const SparseAdjacency& a, const ModelParams& params) {
    check_length(params.b, a.n(), "basal rates");
    if (!(params.alpha >= 0.0) || !std::isfinite(params.alpha)) {
        throw ArgumentError("alpha must be finite and >= 0");
    }
}

// Uniform double in [0, 1) from the top 53 bits.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// With contraction q = alpha_star the error left after a step of size d is
// about d * q / (1 - q) < d / (1 - q), so the stopping test scales d by that.
double error_factor(double alpha_star) { return 1.0 / (1.0 - alpha_star); }

std::size_t default_max_iter(double tol, double alpha_star) {
    double needed = std::ceil(std::log(tol / error_factor(alpha_star)) / std::log(alpha_star)) + 50.0;
    if (!(needed < 1e9)) needed = 1e9;
    return std::max<std::size_t>(1000, static_cast<std::size_t>(std::max(needed, 0.0)));
}

SteadyState fixed_point(const SparseAdjacency& a, std::span<const double> b, double alpha,
                        double alpha_star, SolverOptions opts) {
    check_length(b, a.n(), "steady_state: b");
    if (!(opts.tol > 0.0)) throw ArgumentError("steady_state: tol must be > 0");
    const std::size_t max_iter = opts.max_iter != 0 ? opts.max_iter : default_max_iter(opts.tol, alpha_star);

    SteadyState out;
    out.alpha = alpha;
    out.x.assign(b.begin(), b.end());
    if (alpha == 0.0 || a.nnz() == 0) return out; // x = b solves the system exactly

    std::vector<double> ax(a.n()), next(a.n());
    const double factor = error_factor(alpha_star);
    // relative to |b| once it exceeds 1: count-valued b would otherwise ask for sub-ulp steps
    const double scale = std::max(1.0, kernels::max_abs_diff(b, std::vector<double>(a.n(), 0.0)));
    double diff = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        matvec(a, out.x, ax);
        kernels::affine(b, alpha, ax, next);
        diff = kernels::max_abs_diff(next, out.x);
        out.x.swap(next);
        out.iterations = it;
        if (diff * factor < opts.tol * scale) {
            matvec(a, out.x, ax);
            kernels::affine(b, alpha, ax, next);
            out.residual = kernels::max_abs_diff(out.x, next);
            return out;
        }
        if (!std::isfinite(diff)) break;
    }
    throw ConvergenceError("steady_state: no convergence after " + std::to_string(out.iterations) +
                               " iterations (last difference " + format_shortest(diff) + ")",
                           diff, out.iterations);
}

} // namespace

ModelParams ModelParams::from_alpha_star(double alpha_star, double rho, std::vector<double> b) {
    ModelParams p;
    p.alpha_star = alpha_star;
    p.alpha = (rho > 0.0 && alpha_star != 0.0) ? alpha_star / rho : 0.0;
    p.b = std::move(b);
    return p;
}

std::vector<double> step_probabilities(const SparseAdjacency& a, const ModelParams& params,
                                       std::span<const double> s, Clamp clamp) {
    check_params(a, params);
    check_length(s, a.n(), "step_probabilities: s");
    std::vector<double> p(a.n());
    matvec(a, s, p);
    if (clamp == Clamp::none) {
        kernels::affine(params.b, params.alpha, p, p);
        return p;
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        double base = std::clamp(params.b[i], 0.0, 1.0);
        p[i] = std::clamp(base + params.alpha * p[i], 0.0, 1.0);
    }
    return p;
}

Trajectory simulate(const SparseAdjacency& a, const ModelParams& params, std::span<const double> s0,
                    std::size_t steps, std::uint64_t seed) {
    check_params(a, params);
    check_length(s0, a.n(), "simulate: s0");
    if (steps < 1) throw ArgumentError("simulate: steps must be >= 1");
    for (double v : s0) {
        if (v != 0.0 && v != 1.0) throw ArgumentError("simulate: s0 must be a 0/1 vector");
    }

    const std::size_t n = a.n();
    Trajectory t;
    t.steps = steps;
    t.n = n;
    t.states.resize((steps + 1) * n);
    t.total_per_step.resize(steps + 1);
    std::copy(s0.begin(), s0.end(), t.states.begin());
    t.total_per_step[0] = kernels::sum(s0);

    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < steps; ++k) {
        auto p = step_probabilities(a, params, t.state(k));
        double* next = t.states.data() + (k + 1) * n;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            next[i] = unit_draw(rng) < p[i] ? 1.0 : 0.0;
            total += next[i];
        }
        t.total_per_step[k + 1] = total;
    }
    return t;
}

Trajectory expected_iteration(const SparseAdjacency& a, const ModelParams& params,
                              std::span<const double> e0, std::size_t steps) {
    check_params(a, params);
    check_length(e0, a.n(), "expected_iteration: e0");
    if (steps < 1) throw ArgumentError("expected_iteration: steps must be >= 1");

    const std::size_t n = a.n();
    Trajectory t;
    t.steps = steps;
    t.n = n;
    t.states.resize((steps + 1) * n);
    t.total_per_step.resize(steps + 1);
    std::copy(e0.begin(), e0.end(), t.states.begin());
    t.total_per_step[0] = kernels::sum(e0);

    std::vector<double> ae(n);
    for (std::size_t k = 0; k < steps; ++k) {
        matvec(a, t.state(k), ae);
        std::span<double> next(t.states.data() + (k + 1) * n, n);
        kernels::affine(params.b, params.alpha, ae, next);
        t.total_per_step[k + 1] = kernels::sum(next);
    }
    return t;
}

SteadyState steady_state(const SparseAdjacency& a, std::span<const double> b, double alpha_star,
                         double rho, SolverOptions opts) {
    if (!(alpha_star >= 0.0) || !(alpha_star < 1.0)) {
        throw DomainError("steady_state: alpha_star must lie in [0, 1) so that rho(alpha A) < 1");
    }
    if (!(rho >= 0.0) || !std::isfinite(rho)) throw ArgumentError("steady_state: rho must be finite and >= 0");
    double alpha = (rho > 0.0 && alpha_star > 0.0) ? alpha_star / rho : 0.0;
    return fixed_point(a, b, alpha, alpha_star, opts);
}

std::vector<double> katz_vector(const SparseAdjacency& a, double alpha, SolverOptions opts) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("katz_vector: alpha must be >= 0");
    double rho = spectral_radius(a).rho;
    double alpha_star = alpha * rho;
    if (!(alpha_star < 1.0)) {
        throw DomainError("katz_vector: alpha * rho(A) = " + std::to_string(alpha_star) + " must be < 1");
    }
    std::vector<double> ones(a.n(), 1.0);
    return fixed_point(a, ones, alpha, alpha_star, opts).x;
}

double half_life_from_gamma(double gamma) {
    if (!(gamma > 0.0) || !(gamma < 1.0)) {
        throw DomainError("half_life: gamma = alpha * lambda1 must lie in (0, 1) for decay");
    }
    return std::fabs(std::numbers::ln2 / std::log(gamma));
}

double half_life(double alpha, double lambda1) { return half_life_from_gamma(alpha * lambda1); }

DecayFit fit_decay(std::span<const double> volume) {
    if (volume.size() < 3) throw ArgumentError("fit_decay: need at least 3 bins");
    for (double v : volume) {
        if (!(v > 0.0)) throw DomainError("fit_decay: every bin must be > 0 (log undefined)");
    }
    const auto m = static_cast<double>(volume.size());
    double mean_k = (m - 1.0) / 2.0;
    double mean_y = 0.0;
    for (double v : volume) mean_y += std::log(v);
    mean_y /= m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < volume.size(); ++k) {
        double dk = static_cast<double>(k) - mean_k;
        sxy += dk * (std::log(volume[k]) - mean_y);
        sxx += dk * dk;
    }
    DecayFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = mean_y - fit.slope * mean_k;
    fit.gamma = std::exp(fit.slope);
    fit.half_life = std::fabs(std::numbers::ln2 / fit.slope);
    fit.decaying = fit.slope < 0.0;
    return fit;
}

} // namespace spikerank
