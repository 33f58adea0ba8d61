#include <cmath>
#include <sstream>

#include "winmart/error.hpp"
#include "winmart/summation.hpp"
#include "winmart/value.hpp"

namespace winmart {

namespace {

constexpr double kPi = 3.14159265358979323846;

double test_function(std::size_t j, double x) {
    switch (j) {
    case 0: return 1.0;
    case 1: return x;
    case 2: return x * x;
    default: return std::sin(kPi * x);
    }
}

} // namespace

double MartingaleTestReport::max_abs_statistic() const {
    double m = 0.0;
    for (const auto& row : statistics)
        for (double s : row) m = std::max(m, std::abs(s));
    return m;
}

std::string MartingaleTestReport::verdict_string() const {
    if (verdict == MartingaleVerdict::Consistent) return "martingale-consistent";
    return drift_sign >= 0 ? "drift-detected(positive)" : "drift-detected(negative)";
}

MartingaleTestReport martingale_increment_test(std::string process_id, const PathMatrix& process,
                                               const PathMatrix& state, std::span<const double> times,
                                               std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                               double threshold) {
    if (process.rows() != state.rows() || process.cols() != state.cols())
        throw ParameterError("martingale_increment_test: process and state are not aligned");
    if (times.size() != process.cols())
        throw ParameterError("martingale_increment_test: one time label per column required");

    MartingaleTestReport report;
    report.process_id = std::move(process_id);
    report.threshold = threshold;
    double largest = 0.0;
    std::vector<double> terms;
    terms.reserve(process.rows());

    for (const auto& [i0, i1] : pairs) {
        if (i0 >= process.cols() || i1 >= process.cols() || !(times[i0] < times[i1]))
            throw ParameterError("martingale_increment_test: invalid time pair");
        report.time_pairs.emplace_back(times[i0], times[i1]);
        std::array<double, kTestFunctionCount> stats{};
        std::size_t used = 0;
        for (std::size_t j = 0; j < kTestFunctionCount; ++j) {
            terms.clear();
            for (std::size_t p = 0; p < process.rows(); ++p) {
                const double a = process(p, i0), b = process(p, i1);
                if (!std::isfinite(a) || !std::isfinite(b)) continue;
                terms.push_back((b - a) * test_function(j, state(p, i0)));
            }
            used = terms.size();
            if (used < kMinMartingaleTestPaths) {
                std::ostringstream os;
                os << "martingale_increment_test: only " << used << " usable paths for pair (" << times[i0] << ", "
                   << times[i1] << "), need " << kMinMartingaleTestPaths;
                throw InsufficientDataError(os.str());
            }
            const SampleMoments mom = sample_moments(terms);
            const double se = mom.std_error();
            double stat = 0.0;
            if (se > 0.0) stat = mom.mean / se;
            else if (mom.mean != 0.0) stat = std::copysign(std::numeric_limits<double>::infinity(), mom.mean);
            stats[j] = stat;
            if (std::abs(stat) > std::abs(largest)) largest = stat;
        }
        report.statistics.push_back(stats);
        report.paths_used.push_back(used);
    }
    if (std::abs(largest) > threshold) {
        report.verdict = MartingaleVerdict::DriftDetected;
        report.drift_sign = largest > 0.0 ? 1 : -1;
    }
    return report;
}

} // namespace winmart
