#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "winmart/diffusion.hpp"

namespace winmart {

/// Discrete-time martingale transport against a Gaussian random walk on a
/// uniform spatial grid.
struct DiscreteMartingaleProblem {
    std::vector<double> states; // sorted, uniform spacing
    std::size_t n_steps = 0;    // T
    std::vector<double> mu;     // initial law
    std::vector<double> nu;     // terminal law
    double ref_var = 0.0;       // step variance of the reference walk
    std::vector<double> f0;     // initial reference density on the grid

    std::size_t n_states() const { return states.size(); }
    double dx() const { return states[1] - states[0]; }
    // Throws ParameterError on a broken invariant.
    void validate() const;
};

/// The win-problem: mu = point mass at the state nearest x0, nu = mixture of
/// Gaussian bumps of width w at 0 and 1 whose mean equals that state. The grid
/// is `n_states` points on [lo, hi]; ref_var defaults to 1/T (time-scaled
/// reference) and f0 to the uniform density.
DiscreteMartingaleProblem make_win_problem(std::size_t n_steps, double width, double x0 = 0.5,
                                           std::size_t n_states = 201, double lo = -0.5, double hi = 1.5,
                                           double ref_var = 0.0);

// Uniform density 1/(N dx) on the grid.
std::vector<double> uniform_density(const std::vector<double>& states);

/// JSON {states, T, mu, nu, ref_var[, f0]}; f0 defaults to uniform.
DiscreteMartingaleProblem load_problem_json(std::istream& is);
DiscreteMartingaleProblem load_problem_json_file(const std::string& path);

/// Explicit Markov path law: initial weights and T row-stochastic kernels.
struct MarkovPathLaw {
    std::vector<double> initial;
    std::vector<PathMatrix> kernels;

    std::vector<double> marginal(std::size_t t) const; // law at step t
};

// Row-normalized discretized Gaussian walk with step variance `var`.
MarkovPathLaw gaussian_walk_law(const DiscreteMartingaleProblem& problem, double var,
                                const std::vector<double>& initial);
// γ_T on the grid: initial f0·dx, steps with the problem's ref_var.
MarkovPathLaw reference_law(const DiscreteMartingaleProblem& problem);

struct IdentityCheck {
    double lhs = 0.0; // Σ Q log(Q / γ_T) by chain rule over the grid
    double rhs = 0.0; // -H(Q) + (T/2) log(2πσ²) - ∫ log f0 dμ + (E x_T² - E x_0²)/(2σ²)
    bool infinite = false;         // Q charges a point where γ_T vanishes
    double martingale_defect = 0;  // max |E[x_{t+1} | x_t] - x_t| over states with mass > 1e-12
};

/// Both sides of the relative-entropy identity for a path law Q. The
/// differential entropy is the grid Shannon entropy plus (T+1) log dx, and μ
/// is Q's own initial law.
IdentityCheck entropy_identity_check(const DiscreteMartingaleProblem& problem, const MarkovPathLaw& q);

struct MartingaleCoupling {
    std::vector<PathMatrix> kernels; // T row-stochastic N x N matrices
    PathMatrix multipliers;          // T x N tilting duals λ_t(x)
    std::vector<double> terminal;    // law of x_T under the coupling
    std::vector<double> objective_trace; // KL(Q|γ_T) transition part after each sweep
    std::vector<double> dual_trace;      // dual objective after each sweep (non-decreasing)
    std::size_t sweeps = 0;
    double terminal_tv = 0.0;        // total variation to nu
    double martingale_residual = 0.0; // max conditional-mean error over charged rows
    bool converged = false;
    double initial_kl = 0.0;    // KL(mu | f0 dx)
    double transition_kl = 0.0; // Σ_t E KL(k_t | R_t)

    double kl() const { return initial_kl + transition_kl; }
    // transition_kl / T: the scaled relative entropy against the time-scaled walk.
    double normalized_kl() const { return transition_kl / static_cast<double>(kernels.size()); }
    MarkovPathLaw law(const std::vector<double>& mu) const { return {mu, kernels}; }
};

/// Throws InfeasibleError unless mean(mu) = mean(nu) and every call price of
/// mu is at most that of nu on the grid.
void check_convex_order(const DiscreteMartingaleProblem& problem, double tol = 1e-10);

/// Cyclic Bregman projections: backward pass of per-row exponential tilts
/// (martingale constraints), then the terminal marginal projection. Stops when
/// terminal TV and martingale residual are both <= tol. Throws InfeasibleError
/// (convex order) or NumericalError (root-find failure, reporting the state).
MartingaleCoupling solve_entropic_mot(const DiscreteMartingaleProblem& problem, std::size_t max_iters = 5000,
                                      double tol = 1e-8);

/// Conditional variance of every kernel row divided by the time step dt
/// (1/T when dt <= 0). T x N.
PathMatrix extract_local_vol(const MartingaleCoupling& coupling, const std::vector<double>& states, double dt = 0.0);

/// CSV `step,from,to,prob` of kernel entries above `min_prob`.
void write_kernels_csv(std::ostream& os, const MartingaleCoupling& coupling, const std::vector<double>& states,
                       double min_prob = 0.0);

} // namespace winmart
