#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

#include "winmart/diffusion.hpp"

namespace winmart {

/// How the untracked contribution of [t_last, 1] is bounded.
enum class TailRule {
    None,        // bracket [0, +inf)
    AldousExact, // tail equals E v̄(t_last, M_{t_last}); paths absorbed earlier add 0
    ValueBounds, // any win-martingale: [max(0, ṽ), 2ṽ + bound] per path
    ConstantVol, // constant Σ = a: tail is ½(a - log a - 1)(1 - t_last) exactly
};

std::string to_string(TailRule rule);

struct EntropyEstimate {
    std::string spec_id;
    double x0 = 0.0;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::uint64_t seed = 0;
    std::string grid_id;

    // ½ ∫ (Σ - log Σ - 1) dt over the grid: Monte-Carlo mean and standard error.
    double mean = 0.0;
    double std_error = 0.0;
    // Bounds on the expected contribution of [t_last, 1].
    std::pair<double, double> truncation_bracket{0.0, 0.0};
    TailRule tail_rule = TailRule::None;
    // Per-path grid integral plus the point tail estimate (the exact tail for
    // AldousExact and ConstantVol, the lower bound for ValueBounds).
    double corrected_mean = 0.0;
    double corrected_std_error = 0.0;
};

/// Entropy functional from a per-path, per-interval Σ matrix. Intervals where
/// the path (if `values` is given) already sits on {0, 1}, or where Σ stays
/// exactly 0 for the rest of the path, contribute 0. Any other Σ <= 0 is a
/// NumericalError. `values` (n_paths x n_nodes) is needed for Aldous and
/// ValueBounds tails; `rate` is the constant Σ for ConstantVol.
EntropyEstimate entropy_functional(const PathMatrix& sigma2, const TimeGrid& grid, const PathMatrix* values = nullptr,
                                   TailRule rule = TailRule::None, double rate = 1.0);

/// Analytic-mode estimate from a streaming run whose request had entropy=true.
EntropyEstimate estimate_entropy(const RunResult& run, TailRule rule, double rate = 1.0);

// Default tail rule for a model id: AldousExact for "aldous", ValueBounds otherwise.
TailRule default_tail_rule(const std::string& model_id);

/// (1/n) H(X^n(Q) | X^n(W)) for Q = Brownian motion with variance rate a:
/// n independent Gaussian increments, each contributing ½(a - log a - 1).
double gantert_discrete_entropy_constant_vol(double a, std::size_t n);

// KL(N(0, v1) | N(0, v0)).
double gaussian_kl(double v1, double v0);

/// True when the terminal sample has an atom, i.e. some value repeats. For
/// any win-martingale this always holds, so the discretized relative entropy
/// of the terminal law against Wiener measure is infinite.
bool atomic_terminal_detector(std::span<const double> terminal_values);
bool atomic_terminal_detector(const PathEnsemble& ensemble);
bool atomic_terminal_detector(const BrownianEnsemble& ensemble);

} // namespace winmart
