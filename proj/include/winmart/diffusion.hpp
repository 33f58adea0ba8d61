#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "winmart/time_grid.hpp"

namespace winmart {

/// Volatility surface sigma(t, x) of a martingale diffusion on [0, 1].
///
/// Specs of the form sigma(t, x) = a(t) * sin(pi x) / pi ("sine-separable")
/// carry a(t)^2 separately; the simulator then integrates the time factor
/// exactly over each step and runs the fused SIMD step kernel.
class DiffusionSpec {
public:
    using SigmaFn = std::function<double(double t, double x)>;
    using TimeFactorFn = std::function<double(double t)>;

    DiffusionSpec(std::string id, SigmaFn sigma);

    // sigma(t, x) = sqrt(time_factor_sq(t)) * sin(pi x) / pi.
    static DiffusionSpec sine_separable(std::string id, TimeFactorFn time_factor_sq);

    const std::string& id() const { return id_; }
    double sigma(double t, double x) const { return sigma_(t, x); }
    double sigma2(double t, double x) const {
        const double s = sigma_(t, x);
        return s * s;
    }

    bool is_sine_separable() const { return time_factor_sq_ != nullptr; }
    // a(t)^2; only valid for sine-separable specs.
    double time_factor_sq(double t) const { return time_factor_sq_(t); }

private:
    std::string id_;
    SigmaFn sigma_;
    TimeFactorFn time_factor_sq_;
};

/// Row-major n_rows x n_cols matrix of doubles (paths x nodes or intervals).
class PathMatrix {
public:
    PathMatrix() = default;
    PathMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> data() const { return data_; }
    std::vector<double> column(std::size_t c) const;

    bool operator==(const PathMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Simulated win-martingale paths with completed terminal outcomes.
struct PathEnsemble {
    std::string spec_id;
    TimeGrid grid;
    double x0 = 0.0;
    std::uint64_t seed = 0;
    PathMatrix values;                 // n_paths x n_nodes, every entry in [0, 1]
    std::vector<std::uint8_t> terminal; // completed outcome in {0, 1} per path

    std::size_t n_paths() const { return values.rows(); }
};

/// Unconfined Brownian paths with constant variance rate (no terminal).
struct BrownianEnsemble {
    TimeGrid grid;
    double start = 0.0;
    double variance_rate = 1.0;
    std::uint64_t seed = 0;
    PathMatrix values;

    std::size_t n_paths() const { return values.rows(); }
};

/// What a streaming run records per path. Full ensembles of 10^5 paths on
/// 4096 steps do not fit in memory; most consumers only need reductions.
struct RunRequest {
    bool keep_paths = false;
    // Nodes at which the path value and the running entropy integral are kept.
    std::vector<std::size_t> sample_nodes;
    // Accumulate the analytic-mode entropy integral over the grid.
    bool entropy = false;
    // Complete terminal outcomes with one Bernoulli(last value) draw.
    bool complete_terminal = true;
};

struct RunResult {
    std::string model_id;
    TimeGrid grid;
    double x0 = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_paths = 0;

    PathMatrix paths;                   // if keep_paths
    std::vector<std::size_t> sample_nodes;
    PathMatrix samples;                 // n_paths x sample_nodes.size()
    PathMatrix sample_entropy;          // running integral at each sample node
    std::vector<double> entropy;        // integral over the whole grid, per path
    std::vector<double> last_value;     // value at the last node
    std::vector<std::uint8_t> terminal; // completed outcomes
};

// Worker count from WINMART_THREADS, else hardware concurrency. Results never
// depend on it.
unsigned default_thread_count();

/// Euler-Maruyama simulation clamped to [0, 1], exact boundaries absorbing.
/// Sine-separable specs step with the interval-averaged time factor and the
/// SIMD kernel; other specs use the left-point coefficient.
RunResult run_diffusion(const DiffusionSpec& spec, const TimeGrid& grid, double x0, std::size_t n_paths,
                        std::uint64_t seed, const RunRequest& request, unsigned threads = 0);

/// Brownian motion with variance rate `variance_rate` started at `start`.
/// Analytic entropy uses Sigma = variance_rate on every interval.
RunResult run_brownian(double variance_rate, const TimeGrid& grid, double start, std::size_t n_paths,
                       std::uint64_t seed, const RunRequest& request, unsigned threads = 0);

/// Materialized ensemble (keep_paths + terminal completion).
PathEnsemble simulate_paths(const DiffusionSpec& spec, const TimeGrid& grid, double x0, std::size_t n_paths,
                            std::uint64_t seed, unsigned threads = 0);

BrownianEnsemble simulate_brownian(double variance_rate, const TimeGrid& grid, double start, std::size_t n_paths,
                                   std::uint64_t seed, unsigned threads = 0);

/// Realized quadratic-variation density (dM)^2 / dt per path and interval.
PathMatrix realized_sigma2(const PathMatrix& values, const TimeGrid& grid);
PathMatrix realized_sigma2(const PathEnsemble& ensemble);

/// Interval-averaged quantities used by the sine-separable stepper:
/// integral of a(t)^2 and of log a(t)^2 over [t0, t1].
struct TimeFactorIntegrals {
    double var = 0.0;
    double log_var = 0.0;
};
TimeFactorIntegrals integrate_time_factor(const DiffusionSpec& spec, double t0, double t1);

// Terminal Bernoulli completion draw used for every model.
double terminal_uniform(std::uint64_t seed, std::uint64_t path);

/// Checks the range, absorption and terminal invariants; returns a
/// description of the first violation, or nullopt.
std::optional<std::string> check_ensemble_invariants(const PathEnsemble& ensemble);

void write_paths_csv(std::ostream& os, const PathEnsemble& ensemble);
void write_paths_csv(std::ostream& os, const PathMatrix& values, const TimeGrid& grid);
void write_terminal_csv(std::ostream& os, const PathEnsemble& ensemble);

} // namespace winmart
