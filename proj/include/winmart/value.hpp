#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "winmart/diffusion.hpp"

namespace winmart {

// ---------------------------------------------------------------------------
// Closed-form value functions

// v̄(s, x) = (x - x² - 1 + s)/2 - (1 - s) log(sin(pi x) / (pi sqrt(1 - s))).
// +inf at x in {0, 1} for s < 1; at s = 1 the limit (x - x²)/2.
double v_bar(double s, double x);

// ṽ(s, x) = (x - x² - 1 + s)/2 - (1 - s) log(sqrt(x(1 - x)) / sqrt(1 - s)),
// a lower bound for the value of every win-martingale continuation.
double v_tilde(double s, double x);

// v̄(0, x0); +inf at the boundary.
double optimal_value(double x0);

// Closed-form partial derivatives of v̄ on [0,1) x (0,1).
double v_bar_dt(double s, double x);  // = log(sin(pi x) / (pi sqrt(1 - s)))
double v_bar_dx(double s, double x);  // = (1 - 2x)/2 - pi (1 - s) cot(pi x)
double v_bar_dxx(double s, double x); // = pi² (1 - s) / sin²(pi x) - 1

// Pointwise minimizer 1 / (1 + ∂xx v̄) of the HJB inner problem.
double sigma_star(double t, double x);

using ValueFunction = double (*)(double s, double x);

// ∂t v + ½ inf_Σ {Σ ∂xx v + Σ - log Σ - 1} with central finite differences
// (one-sided in t when t < h). The infimum equals log(1 + ∂xx v) and is -inf
// when 1 + ∂xx v <= 0.
double hjb_residual(double t, double x, double h_fd, ValueFunction v = v_bar);

// Same residual from the closed-form derivatives (identically zero up to
// rounding).
double hjb_residual_closed_form(double t, double x);

// Specific-entropy cost c(Σ) = ½(Σ - log Σ - 1) and its derivative.
double entropy_cost(double sigma2);
double entropy_cost_derivative(double sigma2);

// First-order-condition process L = Σ c'(Σ) - c(Σ). cost_id "entropy" gives
// ½ log Σ; "quadratic" (c = ½(Σ - 1)²) gives ½(Σ² - 1).
double foc_process(const std::string& cost_id, double sigma2);

// A volatility profile x -> sigma(x), with exact derivatives when known.
struct SigmaProfile {
    std::string name;
    std::function<double(double)> f;
    std::function<double(double)> d1; // may be empty
    std::function<double(double)> d2; // may be empty
};

// (1/alpha) sin(alpha x + beta); alpha = pi, beta = 0 is sin(pi x)/pi.
SigmaProfile sine_profile(double alpha, double beta, bool exact_derivatives = true);
// x(1 - x): not a solution.
SigmaProfile parabola_profile(bool exact_derivatives = true);

// sigma'' sigma - (sigma')² + 1. Exact derivatives when the profile has
// them, else fourth-order central differences with step h_fd.
double ode_residual(const SigmaProfile& sigma, double x, double h_fd = 1e-3);

// (∂t + ½ σ² ∂xx) log σ by central differences (one-sided in t when t < h).
double pde_log_sigma_residual(const DiffusionSpec& spec, double t, double x, double h_fd);

// V(y) = ∫_{1/2}^{y} (y - z) / sin²(pi z) dz by adaptive Gauss-Kronrod.
// Throws NumericalError if the error estimate exceeds quad_tol * |V|.
double feller_V(double y, double quad_tol = 1e-8);
// Antiderivative form -log(sin(pi y)) / pi², used as an independent check.
double feller_V_closed_form(double y);

// δ = sup over (0,1) of |log(pi x (1 - x) / sin(pi x))|, found numerically.
// Enters the bound |2ṽ - v̄| <= |x - x² - 1 + s + (1-s)log(1-s)|/2 + δ(1-s).
double value_bound_delta();
// Right-hand side of that bound.
double value_bound_rhs(double s, double x);

// ---------------------------------------------------------------------------
// Martingale hypothesis test

enum class MartingaleVerdict { Consistent, DriftDetected };

// Test functions g in {1, x, x², sin(pi x)} applied to the state at the
// earlier time of each pair.
inline constexpr std::size_t kTestFunctionCount = 4;
inline const std::array<const char*, kTestFunctionCount> kTestFunctionNames = {"1", "x", "x^2", "sin(pi x)"};

struct MartingaleTestReport {
    std::string process_id;
    std::vector<std::pair<double, double>> time_pairs;
    // statistics[i][j]: mean((L_t' - L_t) g_j(M_t)) in standard-error units.
    std::vector<std::array<double, kTestFunctionCount>> statistics;
    std::vector<std::size_t> paths_used;
    MartingaleVerdict verdict = MartingaleVerdict::Consistent;
    int drift_sign = 0; // sign of the largest |statistic| when drift is detected
    double threshold = 3.0;

    double max_abs_statistic() const;
    // "martingale-consistent", "drift-detected(positive)" or "drift-detected(negative)".
    std::string verdict_string() const;
};

inline constexpr std::size_t kMinMartingaleTestPaths = 1000;

/// process and state are n_paths x n_times; times labels the columns and
/// pairs holds column indices (earlier, later). Rows with a non-finite
/// process value at either time are skipped. InsufficientDataError when fewer
/// than kMinMartingaleTestPaths rows remain for a pair.
MartingaleTestReport martingale_increment_test(std::string process_id, const PathMatrix& process,
                                               const PathMatrix& state, std::span<const double> times,
                                               std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                               double threshold = 3.0);

// ---------------------------------------------------------------------------
// Certificates

struct Certificate {
    std::string check_name;
    std::size_t points_tested = 0;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

// Suites: "pde", "feller", "bounds", or "all". Deterministic (fixed seed).
std::vector<Certificate> run_certificates(const std::string& suite, std::uint64_t seed = 20240229);

} // namespace winmart
