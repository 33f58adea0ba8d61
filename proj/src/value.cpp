#include "winmart/value.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "winmart/error.hpp"
#include "winmart/martingales.hpp"

namespace winmart {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_point(double s, double x, const char* what) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError(std::string(what) + ": s must lie in [0, 1]");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError(std::string(what) + ": x must lie in [0, 1]");
}

void check_interior(double s, double x, const char* what) {
    if (!(s >= 0.0 && s < 1.0) || !(x > 0.0 && x < 1.0))
        throw DomainError(std::string(what) + ": need s in [0, 1) and x in (0, 1)");
}

// Derivative in t by central differences, switching to the second-order
// one-sided stencil when t - h would leave [0, 1).
template <class F>
double d_dt(F&& f, double t, double h) {
    if (t - h >= 0.0) return (f(t + h) - f(t - h)) / (2.0 * h);
    return (-3.0 * f(t) + 4.0 * f(t + h) - f(t + 2.0 * h)) / (2.0 * h);
}

template <class F>
double d2_dx2(F&& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

} // namespace

double v_bar(double s, double x) {
    check_point(s, x, "v_bar");
    if (x == 0.0 || x == 1.0) return s < 1.0 ? kInf : 0.0;
    const double q = (x - x * x - 1.0 + s) / 2.0;
    if (s == 1.0) return q;
    return q - (1.0 - s) * std::log(std::sin(kPi * x) / (kPi * std::sqrt(1.0 - s)));
}

double v_tilde(double s, double x) {
    check_point(s, x, "v_tilde");
    if (x == 0.0 || x == 1.0) return s < 1.0 ? kInf : 0.0;
    const double q = (x - x * x - 1.0 + s) / 2.0;
    if (s == 1.0) return q;
    return q - (1.0 - s) * std::log(std::sqrt(x * (1.0 - x)) / std::sqrt(1.0 - s));
}

double optimal_value(double x0) {
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainError("optimal_value: x0 must lie in [0, 1]");
    if (x0 == 0.0 || x0 == 1.0) return kInf;
    return (x0 * (1.0 - x0) - 1.0) / 2.0 - std::log(std::sin(kPi * x0) / kPi);
}

double v_bar_dt(double s, double x) {
    check_interior(s, x, "v_bar_dt");
    return std::log(std::sin(kPi * x) / (kPi * std::sqrt(1.0 - s)));
}

double v_bar_dx(double s, double x) {
    check_interior(s, x, "v_bar_dx");
    return (1.0 - 2.0 * x) / 2.0 - kPi * (1.0 - s) * std::cos(kPi * x) / std::sin(kPi * x);
}

double v_bar_dxx(double s, double x) {
    check_interior(s, x, "v_bar_dxx");
    const double sn = std::sin(kPi * x);
    return kPi * kPi * (1.0 - s) / (sn * sn) - 1.0;
}

double sigma_star(double t, double x) { return 1.0 / (1.0 + v_bar_dxx(t, x)); }

double hjb_residual(double t, double x, double h, ValueFunction v) {
    check_interior(t, x, "hjb_residual");
    if (!(h > 0.0) || !(t + 2.0 * h < 1.0) || !(x - h > 0.0) || !(x + h < 1.0))
        throw DomainError("hjb_residual: stencil leaves the interior");
    const double vt = d_dt([&](double s) { return v(s, x); }, t, h);
    const double vxx = d2_dx2([&](double y) { return v(t, y); }, x, h);
    const double a = 1.0 + vxx;
    if (!(a > 0.0)) return -kInf;
    return vt + 0.5 * std::log(a);
}

double hjb_residual_closed_form(double t, double x) {
    return v_bar_dt(t, x) + 0.5 * std::log(1.0 + v_bar_dxx(t, x));
}

double entropy_cost(double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("entropy_cost: Sigma must be positive");
    return 0.5 * (sigma2 - std::log(sigma2) - 1.0);
}

double entropy_cost_derivative(double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("entropy_cost_derivative: Sigma must be positive");
    return 0.5 * (1.0 - 1.0 / sigma2);
}

double foc_process(const std::string& cost_id, double sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("foc_process: Sigma must be positive");
    if (cost_id == "entropy") return 0.5 * std::log(sigma2);
    if (cost_id == "quadratic") return 0.5 * (sigma2 * sigma2 - 1.0);
    throw ParameterError("foc_process: unknown cost '" + cost_id + "' (expected entropy|quadratic)");
}

SigmaProfile sine_profile(double alpha, double beta, bool exact) {
    if (alpha == 0.0) throw ParameterError("sine_profile: alpha must be nonzero");
    std::ostringstream name;
    name << "sin(" << alpha << "x+" << beta << ")/" << alpha;
    SigmaProfile p{name.str(), [=](double x) { return std::sin(alpha * x + beta) / alpha; }, {}, {}};
    if (exact) {
        p.d1 = [=](double x) { return std::cos(alpha * x + beta); };
        p.d2 = [=](double x) { return -alpha * std::sin(alpha * x + beta); };
    }
    return p;
}

SigmaProfile parabola_profile(bool exact) {
    SigmaProfile p{"x(1-x)", [](double x) { return x * (1.0 - x); }, {}, {}};
    if (exact) {
        p.d1 = [](double x) { return 1.0 - 2.0 * x; };
        p.d2 = [](double) { return -2.0; };
    }
    return p;
}

double ode_residual(const SigmaProfile& sigma, double x, double h) {
    const double s = sigma.f(x);
    double d1, d2;
    if (sigma.d1 && sigma.d2) {
        d1 = sigma.d1(x);
        d2 = sigma.d2(x);
    } else {
        if (!(h > 0.0)) throw ParameterError("ode_residual: h_fd must be positive");
        const double fm2 = sigma.f(x - 2 * h), fm1 = sigma.f(x - h), fp1 = sigma.f(x + h), fp2 = sigma.f(x + 2 * h);
        d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
        d2 = (-fm2 + 16.0 * fm1 - 30.0 * s + 16.0 * fp1 - fp2) / (12.0 * h * h);
    }
    return d2 * s - d1 * d1 + 1.0;
}

double pde_log_sigma_residual(const DiffusionSpec& spec, double t, double x, double h) {
    if (!(t >= 0.0 && t + 2.0 * h < 1.0) || !(x - h > 0.0 && x + h < 1.0) || !(h > 0.0))
        throw DomainError("pde_log_sigma_residual: stencil leaves the interior");
    const double sigma = spec.sigma(t, x);
    if (!(sigma > 0.0)) throw DomainError("pde_log_sigma_residual: sigma vanishes at the point");
    const double lt = d_dt([&](double s) { return std::log(spec.sigma(s, x)); }, t, h);
    const double lxx = d2_dx2([&](double y) { return std::log(spec.sigma(t, y)); }, x, h);
    return lt + 0.5 * sigma * sigma * lxx;
}

double feller_V(double y, double quad_tol) {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("feller_V: y must lie in (0, 1)");
    if (!(quad_tol > 0.0)) throw ParameterError("feller_V: quad_tol must be positive");
    if (y == 0.5) return 0.0;
    // z -> 1 - z maps V(y) onto V(1 - y) exactly; integrating on the lower
    // half keeps sin(pi z) free of cancellation near z = 1.
    const double y_in = y;
    if (y > 0.5) y = 1.0 - y;
    using boost::math::quadrature::gauss_kronrod;
    // With z = y u the integrand y² (u - 1) / sin²(pi y u) is O(1) on O(1)
    // panels whatever the size of y; unscaled, the Kronrod error estimate
    // degrades as y -> 0 even though the integral does not.
    auto integrand = [&](double u) {
        const double sn = std::sin(kPi * y * u);
        return y * y * (u - 1.0) / (sn * sn);
    };
    // Breakpoints u = 1, 2, 3, 5, 9, ... double their distance to u = 1 up
    // to the center z = 1/2, so each panel sees a bounded relative variation.
    std::vector<double> cuts{1.0};
    for (double w = 1.0; (1.0 + w) * y < 0.5; w *= 2.0) cuts.push_back(1.0 + w);
    cuts.push_back(0.5 / y);
    double total = 0.0, total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double err = 0.0;
        // Shallow recursion: the panels are already smooth, and deep
        // bisection only accumulates rounding noise into the estimate.
        total += gauss_kronrod<double, 31>::integrate(integrand, cuts[i], cuts[i + 1], 6, quad_tol * 1e-2, &err);
        total_err += err;
    }
    if (!std::isfinite(total) || total_err > quad_tol * std::abs(total) + 1e-300) {
        std::ostringstream os;
        os << "feller_V: quadrature did not reach tolerance " << quad_tol << " at y=" << y_in << " (error estimate "
           << total_err << ")";
        throw NumericalError(os.str());
    }
    return total;
}

double feller_V_closed_form(double y) {
    if (!(y > 0.0 && y < 1.0)) throw DomainError("feller_V_closed_form: y must lie in (0, 1)");
    return -std::log(std::sin(kPi * y)) / (kPi * kPi);
}

double value_bound_delta() {
    static const double delta = [] {
        auto f = [](double x) { return kPi * x * (1.0 - x) / std::sin(kPi * x); };
        // f is symmetric about 1/2: search (0, 1/2] for both extremes.
        const int bits = std::numeric_limits<double>::digits / 2;
        const auto lo = boost::math::tools::brent_find_minima(f, 1e-9, 0.5, bits);
        const auto hi = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, 1e-9, 0.5, bits);
        return std::max(std::abs(std::log(lo.second)), std::abs(std::log(-hi.second)));
    }();
    return delta;
}

double value_bound_rhs(double s, double x) {
    check_interior(s, x, "value_bound_rhs");
    return std::abs(x - x * x - 1.0 + s + (1.0 - s) * std::log(1.0 - s)) / 2.0 + value_bound_delta() * (1.0 - s);
}

// ---------------------------------------------------------------------------
// Certificates

namespace {

struct Sweep {
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> t{0.0, 0.95};
    std::uniform_real_distribution<double> x{0.05, 0.95};
};

Certificate make_cert(std::string name, std::size_t n, double max_res, double tol, std::string detail = {}) {
    Certificate c;
    c.check_name = std::move(name);
    c.points_tested = n;
    c.max_residual = max_res;
    c.tolerance = tol;
    c.passed = std::isfinite(max_res) && max_res <= tol;
    c.detail = std::move(detail);
    return c;
}

// Observed convergence order of a residual r(h) over h, h/2, h/4: each
// halving must divide |r| by about four. Points where the leading error
// term happens to vanish are skipped.
template <class R>
Certificate richardson_cert(std::string name, Sweep& sw, R residual) {
    const double h0 = 0.01;
    const int n_points = 12;
    double worst = 0.0;
    std::size_t used = 0;
    double min_order = kInf, max_order = -kInf;
    for (int i = 0; i < n_points; ++i) {
        const double t = std::uniform_real_distribution<double>(0.0, 0.8)(sw.rng);
        const double x = std::uniform_real_distribution<double>(0.15, 0.85)(sw.rng);
        const double r1 = residual(t, x, h0), r2 = residual(t, x, h0 / 2), r3 = residual(t, x, h0 / 4);
        if (std::abs(r1) < 1e-9) continue;
        for (double order : {std::log2(std::abs(r1 / r2)), std::log2(std::abs(r2 / r3))}) {
            min_order = std::min(min_order, order);
            max_order = std::max(max_order, order);
            worst = std::max(worst, std::abs(order - 2.0));
        }
        ++used;
    }
    std::ostringstream os;
    os << "observed order in [" << min_order << ", " << max_order << "] over h=" << h0 << ", " << h0 / 2 << ", "
       << h0 / 4;
    if (used == 0) worst = kInf;
    return make_cert(std::move(name), used, worst, 0.3, os.str());
}

void pde_suite(std::vector<Certificate>& out, std::uint64_t seed) {
    Sweep sw{std::mt19937_64(seed)};
    const DiffusionSpec aldous = aldous_spec();
    constexpr int kPoints = 50;
    constexpr double kH = 1e-4;

    double m = 0.0;
    for (int i = 0; i < kPoints; ++i) m = std::max(m, std::abs(hjb_residual(sw.t(sw.rng), sw.x(sw.rng), kH)));
    out.push_back(make_cert("hjb_residual", kPoints, m, 1e-5, "v_bar, central differences, h=1e-4"));
    out.push_back(richardson_cert("hjb_residual_richardson", sw,
                                  [](double t, double x, double h) { return hjb_residual(t, x, h); }));

    m = 0.0;
    for (int i = 0; i < kPoints; ++i)
        m = std::max(m, std::abs(pde_log_sigma_residual(aldous, sw.t(sw.rng), sw.x(sw.rng), kH)));
    out.push_back(make_cert("pde_log_sigma_residual", kPoints, m, 1e-5, "aldous spec, h=1e-4"));
    out.push_back(richardson_cert("pde_log_sigma_residual_richardson", sw, [&](double t, double x, double h) {
        return pde_log_sigma_residual(aldous, t, x, h);
    }));

    m = 0.0;
    const SigmaProfile sine = sine_profile(kPi, 0.0);
    for (int i = 0; i < kPoints; ++i) m = std::max(m, std::abs(ode_residual(sine, sw.x(sw.rng))));
    out.push_back(make_cert("ode_residual_sine", kPoints, m, 1e-12, "sin(pi x)/pi, exact derivatives"));

    m = 0.0;
    const SigmaProfile general = sine_profile(2.0, 0.3, false);
    for (int i = 0; i < kPoints; ++i) m = std::max(m, std::abs(ode_residual(general, sw.x(sw.rng))));
    out.push_back(make_cert("ode_residual_general_solution", kPoints, m, 1e-8, "sin(2x+0.3)/2, differences"));

    // The parabola must be rejected: its residual 2x(1-x) is far from zero.
    double min_control = kInf;
    const SigmaProfile parabola = parabola_profile();
    for (int i = 0; i < kPoints; ++i) min_control = std::min(min_control, std::abs(ode_residual(parabola, sw.x(sw.rng))));
    {
        Certificate c = make_cert("ode_residual_control_rejected", kPoints, min_control, kInf,
                                  "x(1-x) is not a solution; reports the smallest |residual|");
        c.passed = min_control > 1e-2;
        out.push_back(c);
    }

    m = 0.0;
    for (int i = 0; i < 2 * kPoints; ++i) {
        const double t = sw.t(sw.rng), x = sw.x(sw.rng);
        const double a = aldous_sigma(t, x);
        m = std::max(m, std::abs(sigma_star(t, x) - a * a));
    }
    out.push_back(make_cert("sigma_star_equals_aldous", 2 * kPoints, m, 1e-12));

    m = 0.0;
    for (int i = 0; i < 2 * kPoints; ++i) {
        const double s2 = std::exp(std::uniform_real_distribution<double>(-5.0, 5.0)(sw.rng));
        const double l = s2 * entropy_cost_derivative(s2) - entropy_cost(s2);
        m = std::max(m, std::abs(l - foc_process("entropy", s2)));
    }
    out.push_back(make_cert("foc_identity", 2 * kPoints, m, 1e-12, "Sigma c'(Sigma) - c(Sigma) = log(Sigma)/2"));
}

void feller_suite(std::vector<Certificate>& out) {
    const std::vector<double> ys{1e-1, 1e-2, 1e-3, 1e-4};
    std::vector<double> vs;
    double m = 0.0;
    for (double y : ys) {
        vs.push_back(feller_V(y));
        m = std::max(m, std::abs(vs.back() - feller_V_closed_form(y)) / vs.back());
    }
    out.push_back(make_cert("feller_quadrature_vs_antiderivative", ys.size(), m, 1e-8, "relative error"));

    out.push_back(make_cert("feller_center", 1, std::abs(feller_V(0.5)), 0.0));
    m = 0.0;
    for (double y : {0.1, 0.3, 0.01}) m = std::max(m, std::abs(feller_V(y) - feller_V(1.0 - y)) / feller_V(y));
    out.push_back(make_cert("feller_symmetry", 3, m, 1e-8, "relative"));

    bool increasing = true;
    for (std::size_t i = 0; i + 1 < vs.size(); ++i) increasing = increasing && vs[i + 1] > vs[i];
    const double ratio = vs[2] / vs[0];
    std::ostringstream os;
    os.precision(6);
    os << "V(1e-1)=" << vs[0] << " V(1e-2)=" << vs[1] << " V(1e-3)=" << vs[2] << " V(1e-4)=" << vs[3]
       << " V(1e-3)/V(1e-1)=" << ratio;
    Certificate c = make_cert("feller_divergence", ys.size(), ratio, kInf, os.str());
    c.passed = increasing && ratio > 2.0;
    out.push_back(c);
}

void bounds_suite(std::vector<Certificate>& out) {
    double m = 0.0;
    std::size_t n = 0;
    for (int i = 1; i < 200; ++i) {
        const double x = i / 200.0;
        m = std::max(m, std::abs(v_bar(0.0, x) - optimal_value(x)));
        m = std::max(m, std::abs(optimal_value(x) - optimal_value(1.0 - x)));
        ++n;
    }
    out.push_back(make_cert("optimal_value_consistency", n, m, 1e-12, "v_bar(0,x) = optimal_value(x), symmetry"));

    double worst = -kInf;
    n = 0;
    for (int i = 0; i < 40; ++i)
        for (int j = 1; j < 100; ++j) {
            const double s = i / 40.0, x = j / 100.0;
            worst = std::max(worst, std::abs(2.0 * v_tilde(s, x) - v_bar(s, x)) - value_bound_rhs(s, x));
            ++n;
        }
    std::ostringstream os;
    os << "delta=" << value_bound_delta() << "; reports max of |2 v_tilde - v_bar| - bound";
    Certificate c = make_cert("value_bound", n, worst, 1e-12, os.str());
    out.push_back(c);

    const double gap = v_tilde(0.0, 0.5) - v_bar(0.0, 0.5);
    Certificate lb = make_cert("v_tilde_below_v_bar_at_half", 1, gap, 0.0, "v_tilde(0,0.5) - v_bar(0,0.5)");
    lb.passed = gap <= 0.0;
    out.push_back(lb);
}

} // namespace

std::vector<Certificate> run_certificates(const std::string& suite, std::uint64_t seed) {
    std::vector<Certificate> out;
    const bool all = suite == "all";
    if (!all && suite != "pde" && suite != "feller" && suite != "bounds")
        throw ParameterError("unknown certificate suite '" + suite + "' (expected pde|feller|bounds|all)");
    if (all || suite == "pde") pde_suite(out, seed);
    if (all || suite == "feller") feller_suite(out);
    if (all || suite == "bounds") bounds_suite(out);
    return out;
}

} // namespace winmart
