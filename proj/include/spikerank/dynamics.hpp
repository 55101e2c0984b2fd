#pragma once

#include "spikerank/graph.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace spikerank {

/// Response rate and basal activity of the message-driven Markov chain.
///
/// A user's probability of sending in the next time unit is b_i plus alpha
/// times the number of messages they just received.
struct ModelParams {
    double alpha = 0.0;
    std::vector<double> b;
    // alpha * rho(A); informational, alpha is authoritative
    double alpha_star = 0.0;

    /// alpha = alpha_star / rho, or 0 when rho == 0.
    static ModelParams from_alpha_star(double alpha_star, double rho, std::vector<double> b);
};

/// Per-step states of the chain or of its expectation.
///
/// states has steps + 1 rows: row 0 is the initial state, row k the state
/// after k transitions. Simulation rows are 0/1; expectation rows are
/// non-negative reals.
struct Trajectory {
    std::size_t steps = 0;
    std::size_t n = 0;
    std::vector<double> states; // (steps + 1) x n, row-major
    std::vector<double> total_per_step;

    std::span<const double> state(std::size_t k) const {
        return std::span(states).subspan(k * n, n);
    }
};

enum class Clamp { probability, none };

/// p_i = b_i + alpha (A s)_i, clamped to [0, 1] by default (b_i is clamped
/// first). Clamp::none returns the raw linear value.
std::vector<double> step_probabilities(const SparseAdjacency& a, const ModelParams& params,
                                       std::span<const double> s, Clamp clamp = Clamp::probability);

/// Samples the chain for `steps` transitions from s0. Each s[k+1]_i is an
/// independent Bernoulli draw; draws are taken from one seeded generator in
/// (step, ascending node) order so the result is fixed by the seed.
Trajectory simulate(const SparseAdjacency& a, const ModelParams& params, std::span<const double> s0,
                    std::size_t steps, std::uint64_t seed);

/// e[k+1] = b + alpha A e[k] without clamping.
Trajectory expected_iteration(const SparseAdjacency& a, const ModelParams& params,
                              std::span<const double> e0, std::size_t steps);

struct SolverOptions {
    double tol = 1e-10;
    // 0 selects max(1000, ceil(log(tol) / log(alpha_star)) + 50)
    std::size_t max_iter = 0;
};

struct SteadyState {
    std::vector<double> x;
    std::size_t iterations = 0;
    double residual = 0.0; // ||x - b - alpha A x||_inf
    double alpha = 0.0;
};

/// Solves (I - alpha A) x = b by the fixed-point iteration x <- b + alpha A x
/// started at x = b, with alpha = alpha_star / rho (0 if rho or alpha_star is 0).
/// Stops when successive iterates differ by less than tol in the max-norm.
///
/// Throws DomainError unless 0 <= alpha_star < 1, and ConvergenceError
/// (carrying the last difference) if max_iter is exhausted.
SteadyState steady_state(const SparseAdjacency& a, std::span<const double> b, double alpha_star,
                         double rho, SolverOptions opts = {});

/// Katz vector c solving (I - alpha A) c = 1. Throws DomainError unless
/// alpha >= 0 and alpha rho(A) < 1.
std::vector<double> katz_vector(const SparseAdjacency& a, double alpha, SolverOptions opts = {});

/// Spike half-life |log 2 / log(alpha lambda1)| in time units. Throws
/// DomainError unless 0 < alpha lambda1 < 1.
double half_life(double alpha, double lambda1);
double half_life_from_gamma(double gamma);

struct DecayFit {
    double slope = 0.0;     // least-squares slope of log(volume) against bin
    double intercept = 0.0;
    double gamma = 0.0;     // exp(slope)
    double half_life = 0.0; // |log 2 / slope|
    bool decaying = false;  // slope < 0
};

/// Geometric decay fit over a volume segment (length >= 3, all entries > 0).
DecayFit fit_decay(std::span<const double> volume);

} // namespace spikerank
