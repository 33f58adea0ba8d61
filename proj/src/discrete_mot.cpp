#include "winmart/discrete_mot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "winmart/error.hpp"
#include "winmart/summation.hpp"

namespace winmart {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMassFloor = 1e-300;
// States below this mass do not count as visited for defect reporting.
constexpr double kChargedMass = 1e-12;

double mean_of(const std::vector<double>& w, const std::vector<double>& x) {
    std::vector<double> t(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) t[i] = w[i] * x[i];
    return pairwise_sum(t);
}

double sum_of(const std::vector<double>& w) { return pairwise_sum(w); }

double log_sum_exp(std::span<const double> a) {
    double m = kNegInf;
    for (double v : a) m = std::max(m, v);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : a) s += std::exp(v - m);
    return m + std::log(s);
}

std::vector<double> step_marginal(const std::vector<double>& p, const PathMatrix& k) {
    const std::size_t n = p.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] == 0.0) continue;
        const auto row = k.row(i);
        for (std::size_t j = 0; j < n; ++j) out[j] += p[i] * row[j];
    }
    return out;
}

// Tilted row: weights ∝ exp(base_j + λ d_j). Returns the tilted mean of d
// and its variance.
struct Tilt {
    double mean;
    double var;
};

Tilt tilt_moments(std::span<const double> base, std::span<const double> d, double lambda, std::vector<double>& w) {
    double m = kNegInf;
    for (std::size_t j = 0; j < base.size(); ++j) {
        w[j] = base[j] + lambda * d[j];
        m = std::max(m, w[j]);
    }
    double z = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < base.size(); ++j) {
        const double e = std::exp(w[j] - m);
        z += e;
        s1 += e * d[j];
        s2 += e * d[j] * d[j];
    }
    const double mean = s1 / z;
    return {mean, std::max(0.0, s2 / z - mean * mean)};
}

// Finds λ with tilted mean of d equal to 0: safeguarded Newton inside a
// bisection bracket found by doubling.
double solve_tilt(std::span<const double> base, std::span<const double> d, double warm, std::size_t t, double x,
                  std::vector<double>& w) {
    constexpr double kTol = 1e-13;
    constexpr double kMaxLambda = 1e15;
    double lo = -1.0, hi = 1.0;
    while (tilt_moments(base, d, lo, w).mean > 0.0) {
        hi = lo;
        lo *= 2.0;
        if (lo < -kMaxLambda) break;
    }
    while (tilt_moments(base, d, hi, w).mean < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > kMaxLambda) break;
    }
    if (lo < -kMaxLambda || hi > kMaxLambda) {
        std::ostringstream os;
        os << "solve_entropic_mot: martingale tilt diverged at step " << t << ", state " << x;
        throw NumericalError(os.str());
    }
    double lambda = std::clamp(warm, lo, hi);
    for (int it = 0; it < 300; ++it) {
        const Tilt m = tilt_moments(base, d, lambda, w);
        if (std::abs(m.mean) <= kTol) return lambda;
        if (m.mean > 0.0) hi = lambda;
        else lo = lambda;
        double next = m.var > 0.0 ? lambda - m.mean / m.var : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (next == lambda || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lambda)))
            return next;
        lambda = next;
    }
    const Tilt m = tilt_moments(base, d, lambda, w);
    if (std::abs(m.mean) > 1e-10) {
        std::ostringstream os;
        os << "solve_entropic_mot: martingale tilt did not converge at step " << t << ", state " << x
           << " (residual " << m.mean << ")";
        throw NumericalError(os.str());
    }
    return lambda;
}

double call_price(const std::vector<double>& w, const std::vector<double>& x, double k) {
    std::vector<double> t(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) t[i] = w[i] * std::max(0.0, x[i] - k);
    return pairwise_sum(t);
}

} // namespace

void DiscreteMartingaleProblem::validate() const {
    const std::size_t n = states.size();
    if (n < 3) throw ParameterError("problem: need at least 3 states");
    if (n_steps < 1) throw ParameterError("problem: T must be >= 1");
    if (!(ref_var > 0.0) || !std::isfinite(ref_var)) throw ParameterError("problem: ref_var must be positive");
    const double h = dx();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double step = states[i + 1] - states[i];
        if (!(step > 0.0)) throw ParameterError("problem: states must be strictly increasing");
        if (std::abs(step - h) > 1e-9 * std::max(1.0, std::abs(h))) throw ParameterError("problem: states must be uniformly spaced");
    }
    auto check_law = [&](const std::vector<double>& w, const char* name) {
        if (w.size() != n) throw ParameterError(std::string("problem: ") + name + " has the wrong length");
        for (double v : w)
            if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError(std::string("problem: ") + name + " has a negative weight");
        if (std::abs(sum_of(w) - 1.0) > 1e-12) throw ParameterError(std::string("problem: ") + name + " does not sum to 1");
    };
    check_law(mu, "mu");
    check_law(nu, "nu");
    if (f0.size() != n) throw ParameterError("problem: f0 has the wrong length");
    for (double v : f0)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ParameterError("problem: f0 has a negative weight");
}

std::vector<double> uniform_density(const std::vector<double>& states) {
    const double h = states[1] - states[0];
    return std::vector<double>(states.size(), 1.0 / (static_cast<double>(states.size()) * h));
}

DiscreteMartingaleProblem make_win_problem(std::size_t n_steps, double width, double x0, std::size_t n_states,
                                           double lo, double hi, double ref_var) {
    if (n_steps < 1) throw ParameterError("make_win_problem: T must be >= 1");
    if (!(width > 0.0)) throw ParameterError("make_win_problem: width must be positive");
    if (!(x0 > 0.0 && x0 < 1.0)) throw ParameterError("make_win_problem: x0 must lie in (0, 1)");
    if (n_states < 3 || !(hi > lo) || lo > 0.0 || hi < 1.0)
        throw ParameterError("make_win_problem: grid must cover [0, 1] with at least 3 states");
    DiscreteMartingaleProblem p;
    p.n_steps = n_steps;
    p.ref_var = ref_var > 0.0 ? ref_var : 1.0 / static_cast<double>(n_steps);
    p.states.resize(n_states);
    const double h = (hi - lo) / static_cast<double>(n_states - 1);
    for (std::size_t i = 0; i < n_states; ++i) p.states[i] = lo + h * static_cast<double>(i);

    std::size_t start = 0;
    for (std::size_t i = 1; i < n_states; ++i)
        if (std::abs(p.states[i] - x0) < std::abs(p.states[start] - x0)) start = i;
    p.mu.assign(n_states, 0.0);
    p.mu[start] = 1.0;

    auto bump = [&](double c) {
        std::vector<double> b(n_states);
        for (std::size_t i = 0; i < n_states; ++i) {
            const double z = (p.states[i] - c) / width;
            b[i] = std::exp(-0.5 * z * z);
        }
        const double s = sum_of(b);
        for (double& v : b) v /= s;
        return b;
    };
    const auto b0 = bump(0.0), b1 = bump(1.0);
    const double m0 = mean_of(b0, p.states), m1 = mean_of(b1, p.states);
    // Mixture weight chosen so the truncated bumps still have mean x_start.
    const double w1 = (p.states[start] - m0) / (m1 - m0);
    p.nu.resize(n_states);
    for (std::size_t i = 0; i < n_states; ++i) p.nu[i] = w1 * b1[i] + (1.0 - w1) * b0[i];
    const double s = sum_of(p.nu);
    for (double& v : p.nu) v /= s;
    p.f0 = uniform_density(p.states);
    p.validate();
    return p;
}

DiscreteMartingaleProblem load_problem_json(std::istream& is) {
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("problem JSON: ") + e.what());
    }
    DiscreteMartingaleProblem p;
    try {
        p.states = j.at("states").get<std::vector<double>>();
        p.n_steps = j.at("T").get<std::size_t>();
        p.mu = j.at("mu").get<std::vector<double>>();
        p.nu = j.at("nu").get<std::vector<double>>();
        p.ref_var = j.at("ref_var").get<double>();
        if (j.contains("f0")) p.f0 = j.at("f0").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParameterError(std::string("problem JSON: ") + e.what());
    }
    if (p.f0.empty() && p.states.size() >= 2) p.f0 = uniform_density(p.states);
    p.validate();
    return p;
}

DiscreteMartingaleProblem load_problem_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParameterError("cannot open problem file '" + path + "'");
    return load_problem_json(in);
}

std::vector<double> MarkovPathLaw::marginal(std::size_t t) const {
    if (t > kernels.size()) throw ParameterError("marginal: step beyond the horizon");
    std::vector<double> p = initial;
    for (std::size_t s = 0; s < t; ++s) p = step_marginal(p, kernels[s]);
    return p;
}

MarkovPathLaw gaussian_walk_law(const DiscreteMartingaleProblem& problem, double var,
                                const std::vector<double>& initial) {
    if (!(var > 0.0)) throw ParameterError("gaussian_walk_law: variance must be positive");
    const std::size_t n = problem.n_states();
    if (initial.size() != n) throw ParameterError("gaussian_walk_law: initial law has the wrong length");
    PathMatrix k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = problem.states[j] - problem.states[i];
            k(i, j) = std::exp(-d * d / (2.0 * var));
            s += k(i, j);
        }
        for (std::size_t j = 0; j < n; ++j) k(i, j) /= s;
    }
    return {initial, std::vector<PathMatrix>(problem.n_steps, k)};
}

MarkovPathLaw reference_law(const DiscreteMartingaleProblem& problem) {
    std::vector<double> init(problem.n_states());
    for (std::size_t i = 0; i < init.size(); ++i) init[i] = problem.f0[i] * problem.dx();
    const double s = sum_of(init);
    for (double& v : init) v /= s;
    return gaussian_walk_law(problem, problem.ref_var, init);
}

IdentityCheck entropy_identity_check(const DiscreteMartingaleProblem& problem, const MarkovPathLaw& q) {
    const std::size_t n = problem.n_states(), T = problem.n_steps;
    if (q.initial.size() != n || q.kernels.size() != T) throw ParameterError("entropy_identity_check: law does not match problem");
    const double h = problem.dx();
    const double var = problem.ref_var;
    const double log_norm = -0.5 * std::log(2.0 * kPi * var); // log of the Gaussian density prefactor
    const auto& x = problem.states;

    IdentityCheck out;
    // LHS, chain rule: KL of the initial law plus expected KL of each step.
    std::vector<double> lhs_terms, shannon_terms, log_f0_terms;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = q.initial[i];
        if (p <= 0.0) continue;
        if (problem.f0[i] <= 0.0) {
            out.infinite = true;
            continue;
        }
        lhs_terms.push_back(p * std::log(p / (problem.f0[i] * h)));
        shannon_terms.push_back(-p * std::log(p));
        log_f0_terms.push_back(p * std::log(problem.f0[i]));
    }
    std::vector<double> p = q.initial;
    for (std::size_t t = 0; t < T; ++t) {
        const PathMatrix& k = q.kernels[t];
        for (std::size_t i = 0; i < n; ++i) {
            if (p[i] <= 0.0) continue;
            double row_mean = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double kij = k(i, j);
                if (kij <= 0.0) continue;
                const double d = x[j] - x[i];
                const double log_ref = log_norm - d * d / (2.0 * var) + std::log(h);
                if (!std::isfinite(log_ref)) {
                    out.infinite = true;
                    continue;
                }
                lhs_terms.push_back(p[i] * kij * (std::log(kij) - log_ref));
                shannon_terms.push_back(-p[i] * kij * std::log(kij));
                row_mean += kij * x[j];
            }
            if (p[i] > kChargedMass) out.martingale_defect = std::max(out.martingale_defect, std::abs(row_mean - x[i]));
        }
        p = step_marginal(p, k);
    }
    if (out.infinite) {
        out.lhs = out.rhs = std::numeric_limits<double>::infinity();
        return out;
    }
    out.lhs = pairwise_sum(lhs_terms);

    const double h_diff = pairwise_sum(shannon_terms) + static_cast<double>(T + 1) * std::log(h);
    const double ex0 = [&] {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = q.initial[i] * x[i] * x[i];
        return pairwise_sum(t);
    }();
    const double exT = [&] {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = p[i] * x[i] * x[i];
        return pairwise_sum(t);
    }();
    out.rhs = -h_diff + 0.5 * static_cast<double>(T) * std::log(2.0 * kPi * var) - pairwise_sum(log_f0_terms) +
              (exT - ex0) / (2.0 * var);
    return out;
}

void check_convex_order(const DiscreteMartingaleProblem& problem, double tol) {
    const auto& x = problem.states;
    const double m_mu = mean_of(problem.mu, x), m_nu = mean_of(problem.nu, x);
    if (std::abs(m_mu - m_nu) > tol) {
        std::ostringstream os;
        os << "no martingale coupling: mean(mu)=" << m_mu << " differs from mean(nu)=" << m_nu;
        throw InfeasibleError(os.str());
    }
    for (double k : x) {
        const double cm = call_price(problem.mu, x, k), cn = call_price(problem.nu, x, k);
        if (cm > cn + tol) {
            std::ostringstream os;
            os << "no martingale coupling: mu and nu are not in convex order (call at strike " << k << ": " << cm
               << " > " << cn << ")";
            throw InfeasibleError(os.str());
        }
    }
}

MartingaleCoupling solve_entropic_mot(const DiscreteMartingaleProblem& problem, std::size_t max_iters, double tol) {
    problem.validate();
    check_convex_order(problem);
    const std::size_t n = problem.n_states(), T = problem.n_steps;
    const auto& x = problem.states;

    // Reference transition, row-normalized on the grid, in log form.
    PathMatrix log_r(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double d = x[j] - x[i];
            log_r(i, j) = -d * d / (2.0 * problem.ref_var);
        }
        const double lse = log_sum_exp(log_r.row(i));
        for (double& v : log_r.row(i)) v -= lse;
    }
    PathMatrix d(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) d(i, j) = x[j] - x[i];

    std::vector<double> log_nu(n);
    for (std::size_t j = 0; j < n; ++j) log_nu[j] = problem.nu[j] > 0.0 ? std::log(problem.nu[j]) : kNegInf;

    MartingaleCoupling c;
    c.multipliers = PathMatrix(T, n);
    c.kernels.assign(T, PathMatrix(n, n));
    std::vector<PathMatrix> log_k(T, PathMatrix(n, n));
    std::vector<double> psi(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        if (problem.nu[j] == 0.0) psi[j] = kNegInf;
    std::vector<double> log_beta(n), next_beta(n), base(n), work(n);

    c.initial_kl = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (problem.mu[i] <= 0.0) continue;
        const double r = problem.f0[i] * problem.dx();
        c.initial_kl += r > 0.0 ? problem.mu[i] * std::log(problem.mu[i] / r) : std::numeric_limits<double>::infinity();
    }

    for (std::size_t sweep = 0; sweep < max_iters; ++sweep) {
        // Backward pass: martingale projections given the downstream messages.
        next_beta = psi;
        for (std::size_t tt = T; tt-- > 0;) {
            for (std::size_t i = 0; i < n; ++i) {
                bool up = false, down = false;
                for (std::size_t j = 0; j < n; ++j) {
                    base[j] = log_r(i, j) + next_beta[j];
                    if (base[j] == kNegInf) continue;
                    up = up || j > i;
                    down = down || j < i;
                }
                auto lk = log_k[tt].row(i);
                if (!(up && down)) {
                    // Mass can only move to one side: the sole martingale row is
                    // to stay put (or the row is unreachable).
                    std::fill(lk.begin(), lk.end(), kNegInf);
                    lk[i] = 0.0;
                    log_beta[i] = base[i];
                    c.multipliers(tt, i) = 0.0;
                    continue;
                }
                const double lambda = solve_tilt(base, d.row(i), c.multipliers(tt, i), tt, x[i], work);
                c.multipliers(tt, i) = lambda;
                for (std::size_t j = 0; j < n; ++j) work[j] = base[j] + lambda * d(i, j);
                const double lse = log_sum_exp(work);
                log_beta[i] = lse;
                for (std::size_t j = 0; j < n; ++j) lk[j] = work[j] - lse;
            }
            std::swap(log_beta, next_beta);
        }
        // next_beta now holds log β_0.

        // Forward pass: marginals, objective, residuals.
        std::vector<double> p = problem.mu;
        double kl = 0.0, mres = 0.0;
        for (std::size_t tt = 0; tt < T; ++tt) {
            PathMatrix& k = c.kernels[tt];
            for (std::size_t i = 0; i < n; ++i) {
                double row_mean = 0.0;
                std::vector<double> terms;
                for (std::size_t j = 0; j < n; ++j) {
                    const double l = log_k[tt](i, j);
                    const double kij = l == kNegInf ? 0.0 : std::exp(l);
                    k(i, j) = kij;
                    row_mean += kij * x[j];
                    if (kij > 0.0) terms.push_back(kij * (l - log_r(i, j)));
                }
                if (p[i] > 0.0) {
                    kl += p[i] * pairwise_sum(terms);
                    mres = std::max(mres, std::abs(row_mean - x[i]));
                }
            }
            p = step_marginal(p, k);
        }
        double dual = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (problem.mu[i] > 0.0) dual -= problem.mu[i] * next_beta[i];
        for (std::size_t j = 0; j < n; ++j)
            if (problem.nu[j] > 0.0) dual += problem.nu[j] * psi[j];
        double tv = 0.0;
        for (std::size_t j = 0; j < n; ++j) tv += std::abs(p[j] - problem.nu[j]);
        tv *= 0.5;

        c.objective_trace.push_back(kl);
        c.dual_trace.push_back(dual);
        c.sweeps = sweep + 1;
        c.terminal = p;
        c.terminal_tv = tv;
        c.martingale_residual = mres;
        c.transition_kl = kl;
        if (!std::isfinite(kl) || !std::isfinite(dual)) {
            std::ostringstream os;
            os << "solve_entropic_mot: objective became non-finite at sweep " << sweep + 1;
            throw NumericalError(os.str());
        }
        if (tv <= tol && mres <= tol) {
            c.converged = true;
            break;
        }
        // Terminal marginal projection.
        for (std::size_t j = 0; j < n; ++j)
            if (problem.nu[j] > 0.0) psi[j] += log_nu[j] - std::log(std::max(p[j], kMassFloor));
    }
    return c;
}

PathMatrix extract_local_vol(const MartingaleCoupling& coupling, const std::vector<double>& states, double dt) {
    const std::size_t T = coupling.kernels.size(), n = states.size();
    if (dt <= 0.0) dt = 1.0 / static_cast<double>(T);
    PathMatrix out(T, n);
    for (std::size_t t = 0; t < T; ++t) {
        const PathMatrix& k = coupling.kernels[t];
        if (k.rows() != n) throw ParameterError("extract_local_vol: states do not match the kernels");
        for (std::size_t i = 0; i < n; ++i) {
            double m = 0.0;
            for (std::size_t j = 0; j < n; ++j) m += k(i, j) * states[j];
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const double e = states[j] - m;
                v += k(i, j) * e * e;
            }
            out(t, i) = v / dt;
        }
    }
    return out;
}

void write_kernels_csv(std::ostream& os, const MartingaleCoupling& coupling, const std::vector<double>& states,
                       double min_prob) {
    const auto old = os.precision(17);
    os << "step,from,to,prob\n";
    for (std::size_t t = 0; t < coupling.kernels.size(); ++t) {
        const PathMatrix& k = coupling.kernels[t];
        for (std::size_t i = 0; i < k.rows(); ++i)
            for (std::size_t j = 0; j < k.cols(); ++j)
                if (k(i, j) > min_prob) os << t << ',' << states[i] << ',' << states[j] << ',' << k(i, j) << '\n';
    }
    os.precision(old);
}

} // namespace winmart
