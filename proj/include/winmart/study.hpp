#pragma once

// Composite experiments shared by the command-line tool and the acceptance
// suite: entropy runs with their tail corrections, and the martingale tests
// on processes read off a streaming run.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "winmart/diffusion.hpp"
#include "winmart/entropy.hpp"
#include "winmart/time_grid.hpp"
#include "winmart/value.hpp"

namespace winmart {

struct RunSettings {
    std::string model_id = "aldous";
    double x0 = 0.5;
    std::size_t n_paths = 100000;
    std::size_t n_steps = 4096;
    double epsilon_final = kDefaultEpsilonFinal;
    GridMode grid_mode = GridMode::Geometric;
    std::uint64_t seed = 1;
    unsigned threads = 0;

    TimeGrid grid() const { return make_grid(0.0, n_steps, grid_mode, epsilon_final); }
};

// Analytic-mode entropy estimate with the model's default tail rule.
EntropyEstimate run_entropy(const RunSettings& settings);

// Times at which martingale tests sample the process: pairs (0.1, 0.3),
// (0.3, 0.5), (0.5, 0.7), (0.7, 0.9), snapped to the nearest grid nodes.
std::vector<double> default_test_times();

enum class TestProcess {
    LogSigma, // log σ(t, M_t) of the simulated spec (½ log Σ)
    Value,    // R_t = v̄(t, M_t) + ½ ∫_0^t (Σ - log Σ - 1) ds
};

std::string to_string(TestProcess process);

/// Simulates the model at the test times and runs martingale_increment_test
/// on the requested process. LogSigma is only available for diffusion specs.
MartingaleTestReport run_martingale_test(const RunSettings& settings, TestProcess process);

} // namespace winmart
