#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "gen.hpp"
#include "winmart/discrete_mot.hpp"
#include "winmart/entropy.hpp"
#include "winmart/martingales.hpp"
#include "winmart/summation.hpp"
#include "winmart/value.hpp"

using namespace winmart;
using doctest::Approx;

TEST_CASE("property: scaling check is constant in time") {
    gen::for_all(1, 500, [](gen::Rng& r) {
        const double x = r.interior(), t1 = r.uniform(0, 0.999), t2 = r.uniform(0, 0.999);
        CHECK(std::abs(scaling_check(t1, x) - scaling_check(t2, x)) <= 1e-12);
    });
}

TEST_CASE("property: value identities") {
    gen::for_all(2, 500, [](gen::Rng& r) {
        const double x = r.interior(1e-4), s = r.uniform(0.0, 0.99);
        CHECK(optimal_value(x) == Approx(optimal_value(1.0 - x)).epsilon(1e-11));
        CHECK(std::abs(v_bar(0.0, x) - optimal_value(x)) <= 1e-12);
        CHECK(std::abs(2.0 * v_tilde(s, x) - v_bar(s, x)) <= value_bound_rhs(s, x) + 1e-12);
        CHECK(std::abs(hjb_residual_closed_form(s, x)) <= 1e-10 * (1.0 + std::abs(v_bar_dt(s, x))));
        const double a = aldous_sigma(s, x);
        CHECK(std::abs(sigma_star(s, x) - a * a) <= 1e-12 * std::max(1.0, a * a));
    });
}

TEST_CASE("property: entropy cost is nonnegative and minimal at one") {
    gen::for_all(3, 500, [](gen::Rng& r) {
        const double s = r.log_uniform(1e-8, 1e8);
        CHECK(entropy_cost(s) >= 0.0);
        CHECK(gaussian_kl(s, 1.0) == Approx(entropy_cost(s)).epsilon(1e-14));
        const std::size_t n = 1 + r.index(4096);
        CHECK(gantert_discrete_entropy_constant_vol(s, n) == Approx(entropy_cost(s)).epsilon(1e-12));
    });
}

TEST_CASE("property: entropy functional of random positive rates is nonnegative") {
    gen::for_all(4, 50, [](gen::Rng& r) {
        const TimeGrid g = make_grid(0.0, 1 + r.index(64), GridMode::Uniform, r.uniform(1e-3, 0.5));
        PathMatrix s(1 + r.index(20), g.n_steps());
        for (std::size_t p = 0; p < s.rows(); ++p)
            for (std::size_t k = 0; k < s.cols(); ++k) s(p, k) = r.log_uniform(1e-3, 1e3);
        const EntropyEstimate e = entropy_functional(s, g);
        CHECK(e.mean >= 0.0);
        CHECK(e.mean + 3.0 * e.std_error + e.truncation_bracket.second >= 0.0);
    });
}

TEST_CASE("property: pairwise sums and moments") {
    gen::for_all(5, 100, [](gen::Rng& r) {
        std::vector<double> v(1 + r.index(3000));
        for (double& x : v) x = r.uniform(-1.0, 1.0);
        long double ref = 0.0L;
        for (double x : v) ref += x;
        CHECK(std::abs(static_cast<long double>(pairwise_sum(v)) - ref) < 1e-12L);
        const SampleMoments m = sample_moments(v);
        CHECK(m.n == v.size());
        CHECK(m.variance >= 0.0);
    });
}

TEST_CASE("property: feller function matches its antiderivative") {
    gen::for_all(6, 60, [](gen::Rng& r) {
        const double y = r.interior(1e-6);
        CHECK(feller_V(y) == Approx(feller_V_closed_form(y)).epsilon(1e-8).scale(1e-12));
        CHECK(feller_V(y) >= 0.0);
    });
}

TEST_CASE("property: random martingale-compatible problems solve feasibly") {
    gen::for_all(7, 4, [](gen::Rng& r) {
        const std::size_t T = 1 + r.index(4);
        const double x0 = r.uniform(0.2, 0.8), w = r.uniform(0.04, 0.12);
        const DiscreteMartingaleProblem p = make_win_problem(T, w, x0, 101);
        const MartingaleCoupling c = solve_entropic_mot(p, 5000, 1e-8);
        REQUIRE(c.converged);
        CHECK(c.terminal_tv <= 1e-8);
        CHECK(c.martingale_residual <= 1e-8);
        for (std::size_t s = 1; s < c.dual_trace.size(); ++s) CHECK(c.dual_trace[s] >= c.dual_trace[s - 1] - 1e-12);
        CHECK(c.kl() >= 0.0);
        const IdentityCheck ic = entropy_identity_check(p, c.law(p.mu));
        CHECK_FALSE(ic.infinite);
        CHECK(std::abs(ic.lhs - ic.rhs) < 1e-6 * std::max(1.0, std::abs(ic.lhs)));
    });
}

TEST_CASE("property: convex order is necessary") {
    gen::for_all(8, 40, [](gen::Rng& r) {
        DiscreteMartingaleProblem p = make_win_problem(2, 0.05, 0.5, 51);
        p.mu = r.simplex(51);
        // A point mass at mu's mean (to the nearest state) is below mu in convex order.
        double m = 0.0;
        for (std::size_t i = 0; i < 51; ++i) m += p.mu[i] * p.states[i];
        p.nu = p.mu;
        CHECK_NOTHROW(check_convex_order(p));
        std::vector<double> shifted(51, 0.0);
        std::size_t k = 0;
        for (std::size_t i = 0; i < 51; ++i)
            if (std::abs(p.states[i] - m) < std::abs(p.states[k] - m)) k = i;
        shifted[k] = 1.0;
        p.nu = shifted;
        CHECK_THROWS(check_convex_order(p));
    });
}
