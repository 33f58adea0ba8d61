#include <cmath>
#include <numbers>

#include "doctest.h"
#include "winmart/error.hpp"
#include "winmart/martingales.hpp"
#include "winmart/summation.hpp"

using namespace winmart;
using doctest::Approx;
using std::numbers::pi;

TEST_CASE("aldous volatility") {
    CHECK(aldous_sigma(0.0, 0.5) == Approx(0.3183099).epsilon(1e-7));
    CHECK(aldous_sigma(0.75, 0.5) == Approx(0.6366198).epsilon(1e-7));
    for (double t : {0.0, 0.3, 0.99}) {
        CHECK(aldous_sigma(t, 0.0) == 0.0);
        CHECK(aldous_sigma(t, 1.0) == 0.0);
    }
    CHECK_THROWS_AS(aldous_sigma(1.0, 0.5), DomainError);
    CHECK_THROWS_AS(aldous_sigma(0.2, 1.2), DomainError);
}

TEST_CASE("scaling check removes the time factor") {
    CHECK(scaling_check(0.3, 0.5) == Approx(1.0 / pi).epsilon(1e-14));
    CHECK(scaling_check(0.9, 0.5) == Approx(1.0 / pi).epsilon(1e-14));
    for (double t : {0.0, 0.1, 0.5, 0.999})
        CHECK(scaling_check(t, 0.25) == Approx(0.2250791).epsilon(1e-7));
}

TEST_CASE("aldous spec") {
    const DiffusionSpec s = aldous_spec();
    CHECK(s.id() == "aldous");
    CHECK(s.is_sine_separable());
    CHECK(s.sigma(0.4, 0.3) == Approx(aldous_sigma(0.4, 0.3)).epsilon(1e-15));
    CHECK(s.sigma(0.4, 0.0) == 0.0);
    CHECK(s.sigma(0.4, 1.0) == 0.0);
}

TEST_CASE("bass quadratic variation density") {
    CHECK(bass_sigma2(0.0, 0.0) == Approx(1.0 / (2.0 * pi)).epsilon(1e-14));
    CHECK(bass_sigma2(0.75, 0.0) == Approx(0.6366198).epsilon(1e-7));
    CHECK(bass_sigma2(0.2, 50.0) < 1e-300);
    CHECK(bass_sigma2(0.2, -50.0) < 1e-300);
    for (double b : {-3.0, 0.0, 1.7})
        CHECK(bass_log_sigma2(0.4, b) == Approx(std::log(bass_sigma2(0.4, b))).epsilon(1e-13));
    CHECK(std::isfinite(bass_log_sigma2(0.4, 60.0)));
    CHECK_THROWS_AS(bass_sigma2(1.0, 0.0), DomainError);
    CHECK(bass_offset(0.5) == 0.0);
    CHECK(bass_value(0.3, 0.0) == 0.5);
}

TEST_CASE("bass transform of brownian paths") {
    const TimeGrid g = make_grid(0.0, 128, GridMode::Geometric, 1e-4);
    BrownianEnsemble zero;
    zero.grid = g;
    zero.values = PathMatrix(1, g.n_nodes(), 0.0);
    const PathEnsemble flat = bass_transform(zero);
    for (double v : flat.values.data()) CHECK(v == 0.5);

    const std::size_t n = 10000;
    const PathEnsemble e = bass_transform(simulate_brownian(1.0, g, 0.0, n, 21));
    CHECK_FALSE(check_ensemble_invariants(e).has_value());
    for (std::size_t k = 0; k < g.n_nodes(); k += 31) {
        const SampleMoments m = sample_moments(e.values.column(k));
        CHECK(std::abs(m.mean - 0.5) <= 3.5 * std::max(m.std_error(), 1e-12));
    }
    double ones = 0;
    for (auto t : e.terminal) ones += t;
    CHECK(std::abs(ones / n - 0.5) <= 3.0 * std::sqrt(0.25 / n));

    CHECK_THROWS_AS(bass_transform(simulate_brownian(2.0, g, 0.0, 2, 1)), ParameterError);
}

TEST_CASE("streaming bass runs start at x0 and keep the martingale mean") {
    const TimeGrid g = make_grid(0.0, 256, GridMode::Geometric, 1e-4);
    RunRequest req;
    req.sample_nodes = {0, 64, 200};
    const std::size_t n = 10000;
    const RunResult r = run_bass(g, 0.25, n, 3, req);
    for (std::size_t p = 0; p < n; ++p) CHECK(r.samples(p, 0) == Approx(0.25).epsilon(1e-15));
    for (std::size_t c = 1; c < 3; ++c) {
        const SampleMoments m = sample_moments(r.samples.column(c));
        CHECK(std::abs(m.mean - 0.25) <= 3.5 * m.std_error());
    }
    double ones = 0;
    for (auto t : r.terminal) ones += t;
    CHECK(std::abs(ones / n - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / n));
}

TEST_CASE("time changes") {
    for (const char* name : {"id", "sq", "sine"}) {
        const TimeChange tc = time_change_by_name(name);
        CHECK(tc.tau(0.0) == Approx(0.0).epsilon(1e-15));
        CHECK(tc.tau(1.0) == Approx(1.0).epsilon(1e-15));
        double prev = -1.0;
        for (int i = 0; i <= 100; ++i) {
            const double t = i / 100.0;
            CHECK(tc.tau(t) > prev);
            prev = tc.tau(t);
            if (i > 0 && i < 100) {
                CHECK(tc.tau_prime(t) > 0.0);
                const double h = 1e-6;
                CHECK(tc.tau_prime(t) == Approx((tc.tau(t + h) - tc.tau(t - h)) / (2 * h)).epsilon(1e-6));
            }
        }
    }
    CHECK_THROWS_AS(time_change_by_name("cube"), ParameterError);

    const DiffusionSpec base = aldous_spec();
    const DiffusionSpec same = time_change_spec(base, identity_time_change());
    for (double t : {0.0, 0.4, 0.9})
        for (double x : {0.1, 0.5, 0.8}) CHECK(same.sigma(t, x) == Approx(base.sigma(t, x)).epsilon(1e-15));

    const DiffusionSpec sq = time_change_spec(base, square_time_change());
    CHECK(sq.id() == "aldous-tc:sq");
    CHECK(sq.is_sine_separable());
    // Sigma~(t, x) = Sigma(t², x) · 2t, so log Sigma~ picks up the drift log 2t.
    for (double t : {0.2, 0.5, 0.7})
        CHECK(std::log(sq.sigma2(t, 0.4)) ==
              Approx(std::log(base.sigma2(t * t, 0.4)) + std::log(2.0 * t)).epsilon(1e-13));
}

TEST_CASE("model ids") {
    CHECK(is_bass_id("bass"));
    CHECK_FALSE(is_bass_id("aldous"));
    CHECK(spec_from_id("aldous").id() == "aldous");
    CHECK(spec_from_id("aldous-tc:sine").id() == "aldous-tc:sine");
    CHECK_THROWS_AS(spec_from_id("heston"), ParameterError);
    CHECK_THROWS_AS(spec_from_id("bass"), ParameterError);
}
