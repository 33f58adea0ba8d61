#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "winmart/diffusion.hpp"
#include "winmart/error.hpp"
#include "winmart/martingales.hpp"
#include "winmart/summation.hpp"
#include "winmart/time_grid.hpp"

using namespace winmart;
using doctest::Approx;

TEST_CASE("uniform grids") {
    const TimeGrid g = make_grid(0.0, 4, GridMode::Uniform, 0.2);
    REQUIRE(g.n_nodes() == 5);
    const double want[] = {0.0, 0.2, 0.4, 0.6, 0.8};
    for (std::size_t k = 0; k < 5; ++k) CHECK(g[k] == Approx(want[k]).epsilon(1e-15));

    const TimeGrid h = make_grid(0.9, 2, GridMode::Uniform, 0.05);
    CHECK(h[0] == 0.9);
    CHECK(h[1] == Approx(0.925).epsilon(1e-15));
    CHECK(h[2] == Approx(0.95).epsilon(1e-15));
}

TEST_CASE("geometric grid resolves the endgame") {
    const TimeGrid g = make_grid(0.0, 4096, GridMode::Geometric, kDefaultEpsilonFinal);
    CHECK(g.n_steps() == 4096);
    CHECK(g[0] == 0.0);
    CHECK(g.last() == 1.0 - 0x1p-20);
    double min_ratio = 1.0, max_rel_step = 0.0;
    for (std::size_t k = 0; k + 1 < g.n_nodes(); ++k) {
        CHECK(g[k + 1] > g[k]);
        min_ratio = std::min(min_ratio, (1.0 - g[k + 1]) / (1.0 - g[k]));
        max_rel_step = std::max(max_rel_step, g.dt(k) / (1.0 - g[k]));
    }
    CHECK(min_ratio > 0.99);
    CHECK(max_rel_step < 0.01);
    // Roughly half the nodes sit in the last 1% of time.
    std::size_t late = 0;
    for (double t : g.nodes()) late += t > 0.99;
    CHECK(late > g.n_nodes() / 3);
    CHECK(g.nearest_node(0.5) < g.n_nodes());
    CHECK(std::abs(g[g.nearest_node(0.5)] - 0.5) < 0.01);
}

TEST_CASE("grid parameter errors") {
    CHECK_THROWS_AS(make_grid(0.0, 0, GridMode::Uniform, 0.1), ParameterError);
    CHECK_THROWS_AS(make_grid(0.95, 4, GridMode::Uniform, 0.1), ParameterError);
    CHECK_THROWS_AS(make_grid(0.0, 4, GridMode::Uniform, 0.0), ParameterError);
    CHECK_THROWS_AS(parse_grid_mode("log"), ParameterError);
}

TEST_CASE("boundary starts are absorbed") {
    const TimeGrid g = make_grid(0.0, 64, GridMode::Geometric, 1e-4);
    for (double x0 : {0.0, 1.0}) {
        const PathEnsemble e = simulate_paths(aldous_spec(), g, x0, 50, 3);
        for (double v : e.values.data()) CHECK(v == x0);
        for (auto t : e.terminal) CHECK(t == static_cast<std::uint8_t>(x0));
    }
}

TEST_CASE("aldous ensemble satisfies the ensemble invariants and the martingale property") {
    const TimeGrid g = make_grid(0.0, 256, GridMode::Geometric, 1e-5);
    const std::size_t n = 20000;
    const PathEnsemble e = simulate_paths(aldous_spec(), g, 0.5, n, 11);
    CHECK_FALSE(check_ensemble_invariants(e).has_value());
    for (std::size_t k = 0; k < g.n_nodes(); k += 17) {
        const auto col = e.values.column(k);
        const SampleMoments m = sample_moments(col);
        CHECK(std::abs(m.mean - 0.5) <= 3.5 * std::max(m.std_error(), 1e-12));
    }
    double ones = 0;
    for (auto t : e.terminal) ones += t;
    CHECK(std::abs(ones / n - 0.5) <= 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("invariant checker catches violations") {
    const TimeGrid g = make_grid(0.0, 8, GridMode::Uniform, 0.1);
    PathEnsemble e = simulate_paths(aldous_spec(), g, 0.5, 4, 1);
    REQUIRE_FALSE(check_ensemble_invariants(e).has_value());
    PathEnsemble bad = e;
    bad.values(0, 3) = 1.5;
    CHECK(check_ensemble_invariants(bad).has_value());
    bad = e;
    bad.values(1, 2) = 0.0;
    bad.values(1, 3) = 0.3;
    CHECK(check_ensemble_invariants(bad).has_value());
    bad = e;
    bad.values(2, 0) = 0.4;
    CHECK(check_ensemble_invariants(bad).has_value());
}

TEST_CASE("results do not depend on the worker count") {
    const TimeGrid g = make_grid(0.0, 128, GridMode::Geometric, 1e-4);
    // More than one path block, with a ragged tail.
    const std::size_t n = 700;
    const PathEnsemble a = simulate_paths(aldous_spec(), g, 0.3, n, 42, 1);
    const PathEnsemble b = simulate_paths(aldous_spec(), g, 0.3, n, 42, 3);
    CHECK(a.values == b.values);
    CHECK(a.terminal == b.terminal);

    RunRequest req;
    req.entropy = true;
    const RunResult r1 = run_model("bass", g, 0.3, n, 42, req, 1);
    const RunResult r2 = run_model("bass", g, 0.3, n, 42, req, 4);
    CHECK(r1.entropy == r2.entropy);
    CHECK(r1.last_value == r2.last_value);

    const PathEnsemble c = simulate_paths(aldous_spec(), g, 0.3, n, 43, 1);
    CHECK_FALSE(a.values == c.values);
}

TEST_CASE("streaming runs agree with materialized ensembles") {
    const TimeGrid g = make_grid(0.0, 100, GridMode::Uniform, 0.01);
    const PathEnsemble e = simulate_paths(aldous_spec(), g, 0.6, 300, 5);
    RunRequest req;
    req.sample_nodes = {10, 50, 100};
    const RunResult r = run_diffusion(aldous_spec(), g, 0.6, 300, 5, req);
    for (std::size_t p = 0; p < 300; ++p) {
        CHECK(r.samples(p, 0) == e.values(p, 10));
        CHECK(r.samples(p, 2) == e.values(p, 100));
        CHECK(r.last_value[p] == e.values(p, 100));
        CHECK(r.terminal[p] == e.terminal[p]);
    }
}

TEST_CASE("realized quadratic variation") {
    const TimeGrid g = make_grid(0.0, 200, GridMode::Uniform, 1e-3);
    PathMatrix flat(3, g.n_nodes(), 0.4);
    const PathMatrix zero = realized_sigma2(flat, g);
    for (double s : zero.data()) CHECK(s == 0.0);

    const BrownianEnsemble b = simulate_brownian(1.0, g, 0.0, 4000, 8);
    const PathMatrix s2 = realized_sigma2(b.values, g);
    CHECK(s2.rows() == 4000);
    CHECK(s2.cols() == g.n_steps());
    std::vector<double> per_path(s2.rows());
    for (std::size_t p = 0; p < s2.rows(); ++p) {
        double acc = 0.0;
        for (std::size_t k = 0; k < s2.cols(); ++k) acc += s2(p, k) * g.dt(k);
        per_path[p] = acc / (g.last() - g[0]);
    }
    const SampleMoments m = sample_moments(per_path);
    CHECK(std::abs(m.mean - 1.0) < 3.0 * m.std_error());

    const PathEnsemble e = simulate_paths(aldous_spec(), g, 0.5, 2000, 9);
    const PathMatrix rs = realized_sigma2(e);
    for (double s : rs.data()) CHECK(s >= 0.0);
}

TEST_CASE("variance identity: integrated sigma^2 matches Var(M_last)") {
    const TimeGrid g = make_grid(0.0, 512, GridMode::Geometric, 1e-3);
    const std::size_t n = 20000;
    const DiffusionSpec spec = aldous_spec();
    const PathEnsemble e = simulate_paths(spec, g, 0.5, n, 13);
    std::vector<double> qv(n), sq(n);
    for (std::size_t p = 0; p < n; ++p) {
        double acc = 0.0;
        for (std::size_t k = 0; k < g.n_steps(); ++k) {
            const double m = e.values(p, k);
            acc += spec.sigma2(g[k], m) * g.dt(k);
        }
        qv[p] = acc;
        const double d = e.values(p, g.n_steps()) - 0.5;
        sq[p] = d * d;
    }
    const SampleMoments a = sample_moments(qv), b = sample_moments(sq);
    const double se = std::hypot(a.std_error(), b.std_error());
    CHECK(std::abs(a.mean - b.mean) < 3.0 * se + 2e-3);
}

TEST_CASE("sine-separable time factor integration") {
    const DiffusionSpec spec = aldous_spec();
    const TimeFactorIntegrals f = integrate_time_factor(spec, 0.2, 0.6);
    CHECK(f.var == Approx(std::log(0.8 / 0.4)).epsilon(1e-13));
    // ∫ -log(1-t) dt over [0.2, 0.6]
    auto prim = [](double t) { return (1.0 - t) * std::log(1.0 - t) - (1.0 - t); };
    CHECK(f.log_var == Approx(prim(0.6) - prim(0.2)).epsilon(1e-12));
}

TEST_CASE("non-separable specs use the generic euler step") {
    const DiffusionSpec neg("parabola", [](double, double x) { return x * (1.0 - x); });
    const TimeGrid g = make_grid(0.0, 16, GridMode::Uniform, 0.1);
    const PathEnsemble e = simulate_paths(neg, g, 0.5, 10, 1);
    CHECK_FALSE(check_ensemble_invariants(e).has_value());
}

TEST_CASE("csv export") {
    const TimeGrid g = make_grid(0.0, 2, GridMode::Uniform, 0.5);
    const PathEnsemble e = simulate_paths(aldous_spec(), g, 0.5, 2, 7);
    std::ostringstream os;
    write_paths_csv(os, e);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "path,t,value");
    int rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 2 * 3);
    std::ostringstream ts;
    write_terminal_csv(ts, e);
    CHECK(ts.str().rfind("path,terminal\n", 0) == 0);
}
