#include "winmart/martingales.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <limits>

#include "path_engine.hpp"
#include "winmart/error.hpp"

namespace winmart {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLog2Pi = 1.83787706640934548356;

double sin_pi(double x) {
    if (x == 0.0 || x == 1.0) return 0.0;
    return std::sin(kPi * x);
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

void require_before_one(double t, const char* what) {
    if (!(t < 1.0)) throw DomainError(std::string(what) + ": t must be < 1");
}

// Bass paths are stepped on the driving Brownian level; the observed value is
// Phi(b / sqrt(1 - t)), latched once it rounds onto a boundary.
struct BassModel {
    const TimeGrid* grid;
    std::vector<double> latched = std::vector<double>(detail::kPathBlock, std::numeric_limits<double>::quiet_NaN());

    bool alive(std::size_t i) const { return std::isnan(latched[i]); }

    void step(std::size_t k, std::span<double> b, std::span<const double> z, std::span<double> entropy,
              bool accumulate) {
        const double t = (*grid)[k];
        const double dt = grid->dt(k);
        const double sdt = std::sqrt(dt);
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!alive(i)) continue;
            if (accumulate) {
                const double ls = bass_log_sigma2(t, b[i]);
                entropy[i] += 0.5 * ((std::exp(ls) - ls) - 1.0) * dt;
            }
            b[i] += sdt * z[i];
        }
    }

    void observe(std::size_t node, std::span<const double> b, std::span<double> out) {
        const double t = (*grid)[node];
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (!alive(i)) {
                out[i] = latched[i];
                continue;
            }
            const double x = bass_value(t, b[i]);
            if (x <= 0.0 || x >= 1.0) latched[i] = x;
            out[i] = x;
        }
    }
};

} // namespace

double aldous_sigma(double t, double x) {
    require_before_one(t, "aldous_sigma");
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("aldous_sigma: x must lie in [0, 1]");
    return sin_pi(x) / (kPi * std::sqrt(1.0 - t));
}

double scaling_check(double t, double x) { return aldous_sigma(t, x) * std::sqrt(1.0 - t); }

DiffusionSpec aldous_spec() {
    return DiffusionSpec::sine_separable("aldous", [](double t) {
        require_before_one(t, "aldous time factor");
        return 1.0 / (1.0 - t);
    });
}

TimeChange identity_time_change() {
    return {"id", [](double t) { return t; }, [](double) { return 1.0; }};
}

TimeChange square_time_change() {
    return {"sq", [](double t) { return t * t; }, [](double t) { return 2.0 * t; }};
}

TimeChange sine_time_change() {
    return {"sine", [](double t) { return t - std::sin(2.0 * kPi * t) / (4.0 * kPi); },
            [](double t) { return 1.0 - 0.5 * std::cos(2.0 * kPi * t); }};
}

TimeChange time_change_by_name(const std::string& name) {
    if (name == "id") return identity_time_change();
    if (name == "sq") return square_time_change();
    if (name == "sine") return sine_time_change();
    throw ParameterError("unknown time change '" + name + "' (expected id|sq|sine)");
}

DiffusionSpec time_change_spec(const DiffusionSpec& base, const TimeChange& tc) {
    if (!tc.tau || !tc.tau_prime) throw ParameterError("time_change_spec: incomplete time change");
    std::string id = base.id() + "-tc:" + tc.name;
    if (base.is_sine_separable()) {
        return DiffusionSpec::sine_separable(std::move(id), [base, tc](double t) {
            return base.time_factor_sq(tc.tau(t)) * tc.tau_prime(t);
        });
    }
    return DiffusionSpec(std::move(id), [base, tc](double t, double x) {
        return base.sigma(tc.tau(t), x) * std::sqrt(tc.tau_prime(t));
    });
}

double bass_value(double t, double b) {
    require_before_one(t, "bass_value");
    return std_normal_cdf(b / std::sqrt(1.0 - t));
}

double bass_log_sigma2(double t, double b) {
    require_before_one(t, "bass_sigma2");
    const double r = 1.0 - t;
    return -kLog2Pi - b * b / r - std::log(r);
}

double bass_sigma2(double t, double b) { return std::exp(bass_log_sigma2(t, b)); }

double bass_offset(double x0) {
    if (!(x0 > 0.0 && x0 < 1.0)) throw ParameterError("bass: x0 must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), x0);
}

PathEnsemble bass_transform(const BrownianEnsemble& brownian) {
    if (brownian.variance_rate != 1.0) throw ParameterError("bass_transform: needs standard Brownian motion");
    const TimeGrid& g = brownian.grid;
    PathEnsemble e;
    e.spec_id = "bass";
    e.grid = g;
    e.x0 = bass_value(g[0], brownian.start);
    e.seed = brownian.seed;
    e.values = PathMatrix(brownian.n_paths(), g.n_nodes());
    e.terminal.resize(brownian.n_paths());
    for (std::size_t p = 0; p < brownian.n_paths(); ++p) {
        double absorbed = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t k = 0; k < g.n_nodes(); ++k) {
            double x = std::isnan(absorbed) ? bass_value(g[k], brownian.values(p, k)) : absorbed;
            if (x <= 0.0 || x >= 1.0) absorbed = x;
            e.values(p, k) = x;
        }
        e.terminal[p] = terminal_uniform(brownian.seed, p) < e.values(p, g.n_nodes() - 1) ? 1 : 0;
    }
    return e;
}

RunResult run_bass(const TimeGrid& grid, double x0, std::size_t n_paths, std::uint64_t seed,
                   const RunRequest& request, unsigned threads) {
    const double c = bass_offset(x0) * std::sqrt(1.0 - grid.start_time());
    return detail::run_paths("bass", grid, bass_value(grid.start_time(), c), c, n_paths, seed, request, threads,
                             [&] { return BassModel{&grid}; });
}

bool is_bass_id(const std::string& id) { return id == "bass"; }

DiffusionSpec spec_from_id(const std::string& id) {
    if (id == "aldous") return aldous_spec();
    const std::string prefix = "aldous-tc:";
    if (id.rfind(prefix, 0) == 0) return time_change_spec(aldous_spec(), time_change_by_name(id.substr(prefix.size())));
    throw ParameterError("unknown spec id '" + id + "' (expected aldous|bass|aldous-tc:<id|sq|sine>)");
}

RunResult run_model(const std::string& id, const TimeGrid& grid, double x0, std::size_t n_paths,
                    std::uint64_t seed, const RunRequest& request, unsigned threads) {
    if (is_bass_id(id)) return run_bass(grid, x0, n_paths, seed, request, threads);
    return run_diffusion(spec_from_id(id), grid, x0, n_paths, seed, request, threads);
}

PathEnsemble simulate_model(const std::string& id, const TimeGrid& grid, double x0, std::size_t n_paths,
                            std::uint64_t seed, unsigned threads) {
    RunRequest req;
    req.keep_paths = true;
    RunResult r = run_model(id, grid, x0, n_paths, seed, req, threads);
    return PathEnsemble{r.model_id, grid, r.x0, seed, std::move(r.paths), std::move(r.terminal)};
}

} // namespace winmart
