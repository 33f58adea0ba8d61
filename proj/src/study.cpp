#include "winmart/study.hpp"

#include <cmath>

#include "winmart/error.hpp"
#include "winmart/martingales.hpp"

namespace winmart {

EntropyEstimate run_entropy(const RunSettings& s) {
    RunRequest req;
    req.entropy = true;
    req.complete_terminal = false;
    const RunResult run = run_model(s.model_id, s.grid(), s.x0, s.n_paths, s.seed, req, s.threads);
    return estimate_entropy(run, default_tail_rule(s.model_id));
}

std::vector<double> default_test_times() { return {0.1, 0.3, 0.5, 0.7, 0.9}; }

std::string to_string(TestProcess process) {
    return process == TestProcess::LogSigma ? "log-sigma" : "value-process";
}

MartingaleTestReport run_martingale_test(const RunSettings& s, TestProcess process) {
    const TimeGrid grid = s.grid();
    const std::vector<double> wanted = default_test_times();
    RunRequest req;
    req.entropy = process == TestProcess::Value;
    req.complete_terminal = false;
    std::vector<double> times;
    for (double t : wanted) {
        req.sample_nodes.push_back(grid.nearest_node(t));
        times.push_back(grid[req.sample_nodes.back()]);
    }
    const RunResult run = run_model(s.model_id, grid, s.x0, s.n_paths, s.seed, req, s.threads);

    PathMatrix values(run.n_paths, times.size());
    if (process == TestProcess::LogSigma) {
        if (is_bass_id(s.model_id)) throw ParameterError("log-sigma test needs a diffusion spec");
        const DiffusionSpec spec = spec_from_id(s.model_id);
        for (std::size_t p = 0; p < run.n_paths; ++p)
            for (std::size_t c = 0; c < times.size(); ++c) {
                const double m = run.samples(p, c);
                // Absorbed paths give -inf and are skipped by the test.
                values(p, c) = (m > 0.0 && m < 1.0) ? std::log(spec.sigma(times[c], m))
                                                    : -std::numeric_limits<double>::infinity();
            }
    } else {
        for (std::size_t p = 0; p < run.n_paths; ++p)
            for (std::size_t c = 0; c < times.size(); ++c) {
                const double m = run.samples(p, c);
                values(p, c) = (m > 0.0 && m < 1.0) ? v_bar(times[c], m) + run.sample_entropy(p, c)
                                                    : std::numeric_limits<double>::infinity();
            }
    }
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t c = 0; c + 1 < times.size(); ++c) pairs.emplace_back(c, c + 1);
    return martingale_increment_test(s.model_id + ":" + to_string(process), values, run.samples, times, pairs);
}

} // namespace winmart
