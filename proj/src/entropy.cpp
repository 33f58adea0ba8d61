#include "winmart/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "winmart/error.hpp"
#include "winmart/summation.hpp"
#include "winmart/value.hpp"

namespace winmart {

namespace {

bool inside(double x) { return x > 0.0 && x < 1.0; }

struct Tail {
    double point = 0.0; // enters corrected_mean
    double lo = 0.0;
    double hi = 0.0;
};

Tail path_tail(TailRule rule, double t_last, double m, double rate) {
    switch (rule) {
    case TailRule::None: return {0.0, 0.0, std::numeric_limits<double>::infinity()};
    case TailRule::ConstantVol: {
        const double c = 0.5 * ((rate - std::log(rate)) - 1.0) * (1.0 - t_last);
        return {c, c, c};
    }
    case TailRule::AldousExact: {
        if (!inside(m)) return {0.0, 0.0, 0.0};
        const double v = v_bar(t_last, m);
        return {v, 0.0, v};
    }
    case TailRule::ValueBounds: {
        if (!inside(m)) return {0.0, 0.0, 0.0};
        const double vt = v_tilde(t_last, m);
        const double lo = std::max(0.0, vt);
        return {lo, lo, std::max(lo, 2.0 * vt + value_bound_rhs(t_last, m))};
    }
    }
    return {};
}

void finish(EntropyEstimate& e, const std::vector<double>& grid_part, TailRule rule, double t_last,
            std::span<const double> last_values, double rate) {
    const std::size_t n = grid_part.size();
    const SampleMoments mom = sample_moments(grid_part);
    e.n_paths = n;
    e.mean = mom.mean;
    e.std_error = mom.std_error();
    e.tail_rule = rule;

    std::vector<double> corrected(n), lo(n), hi(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double m = last_values.empty() ? 0.5 : last_values[p];
        const Tail t = path_tail(rule, t_last, m, rate);
        corrected[p] = grid_part[p] + t.point;
        lo[p] = t.lo;
        hi[p] = t.hi;
    }
    const SampleMoments c = sample_moments(corrected);
    e.corrected_mean = c.mean;
    e.corrected_std_error = c.std_error();
    e.truncation_bracket = {sample_moments(lo).mean, rule == TailRule::None ? std::numeric_limits<double>::infinity()
                                                                            : sample_moments(hi).mean};
}

} // namespace

std::string to_string(TailRule rule) {
    switch (rule) {
    case TailRule::None: return "none";
    case TailRule::AldousExact: return "aldous-exact";
    case TailRule::ValueBounds: return "value-bounds";
    case TailRule::ConstantVol: return "constant-vol";
    }
    return "?";
}

TailRule default_tail_rule(const std::string& model_id) {
    return model_id == "aldous" ? TailRule::AldousExact : TailRule::ValueBounds;
}

EntropyEstimate entropy_functional(const PathMatrix& sigma2, const TimeGrid& grid, const PathMatrix* values,
                                   TailRule rule, double rate) {
    if (sigma2.cols() != grid.n_steps()) throw ParameterError("entropy_functional: one Sigma per grid interval");
    if (sigma2.rows() < 1) throw ParameterError("entropy_functional: no paths");
    if (values && (values->rows() != sigma2.rows() || values->cols() != grid.n_nodes()))
        throw ParameterError("entropy_functional: values do not match Sigma");
    if ((rule == TailRule::AldousExact || rule == TailRule::ValueBounds) && !values)
        throw ParameterError("entropy_functional: this tail rule needs the path values");
    if (rule == TailRule::ConstantVol && !(rate > 0.0)) throw ParameterError("entropy_functional: rate must be > 0");

    const std::size_t n = sigma2.rows(), steps = grid.n_steps();
    std::vector<double> per_path(n), terms(steps), last(values ? n : 0);
    for (std::size_t p = 0; p < n; ++p) {
        const auto s = sigma2.row(p);
        // Without path values, an absorbed stretch shows up as Σ = 0 until the end.
        std::size_t zero_from = steps;
        if (!values)
            while (zero_from > 0 && s[zero_from - 1] == 0.0) --zero_from;
        for (std::size_t k = 0; k < steps; ++k) {
            const bool absorbed = values ? !inside((*values)(p, k)) : k >= zero_from;
            if (absorbed) {
                terms[k] = 0.0;
                continue;
            }
            if (!(s[k] > 0.0) || !std::isfinite(s[k])) {
                std::ostringstream os;
                os << "entropy_functional: Sigma = " << s[k] << " on unabsorbed interval " << k << " of path " << p;
                throw NumericalError(os.str());
            }
            terms[k] = 0.5 * ((s[k] - std::log(s[k])) - 1.0) * grid.dt(k);
        }
        per_path[p] = pairwise_sum(terms);
        if (values) last[p] = (*values)(p, grid.n_nodes() - 1);
    }
    EntropyEstimate e;
    e.n_steps = steps;
    e.grid_id = grid.id();
    finish(e, per_path, rule, grid.last(), last, rate);
    return e;
}

EntropyEstimate estimate_entropy(const RunResult& run, TailRule rule, double rate) {
    if (run.entropy.size() != run.n_paths || run.n_paths == 0)
        throw ParameterError("estimate_entropy: run carries no entropy integrals");
    EntropyEstimate e;
    e.spec_id = run.model_id;
    e.x0 = run.x0;
    e.seed = run.seed;
    e.n_steps = run.grid.n_steps();
    e.grid_id = run.grid.id();
    finish(e, run.entropy, rule, run.grid.last(), run.last_value, rate);
    return e;
}

double gaussian_kl(double v1, double v0) {
    if (!(v1 > 0.0) || !(v0 > 0.0)) throw DomainError("gaussian_kl: variances must be positive");
    const double r = v1 / v0;
    return 0.5 * ((r - std::log(r)) - 1.0);
}

double gantert_discrete_entropy_constant_vol(double a, std::size_t n) {
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("gantert_discrete_entropy_constant_vol: a must be > 0");
    if (n < 1) throw ParameterError("gantert_discrete_entropy_constant_vol: n must be >= 1");
    // Increments of Q are N(0, a/n), of W are N(0, 1/n): n independent
    // terms, each the same KL of variance ratio a. The n-step entropy is n
    // times that, so the scaled value is one term for every n.
    return gaussian_kl(a, 1.0);
}

bool atomic_terminal_detector(std::span<const double> terminal_values) {
    std::vector<double> v(terminal_values.begin(), terminal_values.end());
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) != v.end();
}

bool atomic_terminal_detector(const PathEnsemble& ensemble) {
    std::vector<double> v;
    if (!ensemble.terminal.empty()) {
        v.assign(ensemble.terminal.begin(), ensemble.terminal.end());
    } else {
        v = ensemble.values.column(ensemble.values.cols() - 1);
    }
    return atomic_terminal_detector(v);
}

bool atomic_terminal_detector(const BrownianEnsemble& ensemble) {
    return atomic_terminal_detector(ensemble.values.column(ensemble.values.cols() - 1));
}

} // namespace winmart
