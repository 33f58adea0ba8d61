#pragma once

#include <functional>
#include <string>

#include "winmart/diffusion.hpp"

namespace winmart {

// sin(pi x) / (pi sqrt(1 - t)): the entropy-optimal win-martingale volatility.
// Throws DomainError for t >= 1 or x outside [0, 1].
double aldous_sigma(double t, double x);

// aldous_sigma(t, x) * sqrt(1 - t); equals sin(pi x)/pi for every t.
double scaling_check(double t, double x);

// Sine-separable spec with a(t)^2 = 1/(1 - t), id "aldous".
DiffusionSpec aldous_spec();

/// Deterministic time change tau of [0, 1] onto itself.
struct TimeChange {
    std::string name;
    std::function<double(double)> tau;
    std::function<double(double)> tau_prime;
};

TimeChange identity_time_change();
// tau(t) = t^2.
TimeChange square_time_change();
// tau(t) = t - sin(2 pi t) / (4 pi); tau' = 1 - cos(2 pi t)/2 stays in [1/2, 3/2].
TimeChange sine_time_change();
// "id", "sq" or "sine".
TimeChange time_change_by_name(const std::string& name);

/// Spec whose quadratic-variation density is Sigma(tau(t), x) * tau'(t).
/// Sine-separable bases stay sine-separable. The id becomes "<base>-tc:<name>".
DiffusionSpec time_change_spec(const DiffusionSpec& base, const TimeChange& tc);

// Bass martingale X_t = Phi((B_t + c) / sqrt(1 - t)) with c = Phi^{-1}(x0);
// c = 0 gives the x0 = 1/2 martingale.
double bass_value(double t, double b);

// Quadratic-variation density phi(b / sqrt(1 - t))^2 / (1 - t) of the Bass
// martingale, as a function of the Brownian level b. DomainError for t >= 1.
double bass_sigma2(double t, double b);
// Its logarithm, finite even where bass_sigma2 underflows.
double bass_log_sigma2(double t, double b);

// Phi^{-1}(x0): the Brownian level that starts the Bass martingale at x0.
double bass_offset(double x0);

/// Pointwise transform of a standard Brownian ensemble into Bass paths. The
/// Brownian start value is the offset c; exact 0/1 values are absorbing and
/// terminal outcomes are completed from the shared terminal stream.
PathEnsemble bass_transform(const BrownianEnsemble& brownian);

/// Streaming Bass run started at x0. Entropy uses bass_sigma2 at the left
/// node of each interval along the Brownian path.
RunResult run_bass(const TimeGrid& grid, double x0, std::size_t n_paths, std::uint64_t seed,
                   const RunRequest& request, unsigned threads = 0);

/// Model ids accepted by the CLI: "aldous", "bass", "aldous-tc:<name>".
bool is_bass_id(const std::string& id);
// Diffusion spec for every non-Bass id; ParameterError otherwise.
DiffusionSpec spec_from_id(const std::string& id);

// Runs the model behind `id` (Bass or diffusion).
RunResult run_model(const std::string& id, const TimeGrid& grid, double x0, std::size_t n_paths,
                    std::uint64_t seed, const RunRequest& request, unsigned threads = 0);
PathEnsemble simulate_model(const std::string& id, const TimeGrid& grid, double x0, std::size_t n_paths,
                            std::uint64_t seed, unsigned threads = 0);

} // namespace winmart
