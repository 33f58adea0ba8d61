#include "winmart/diffusion.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <sstream>
#include <thread>

#include "path_engine.hpp"
#include "winmart/error.hpp"
#include "winmart/rng.hpp"
#include "winmart/simd/kernels.hpp"

namespace winmart {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool inside(double x) { return x > 0.0 && x < 1.0; }

// Sine-separable model: all work happens in the fused kernel.
struct SineModel {
    const std::vector<simd::SineStepParams>* params;
    const simd::KernelTable* kernels;

    void step(std::size_t k, std::span<double> x, std::span<const double> z, std::span<double> entropy,
              bool accumulate) {
        simd::SineStepParams p = (*params)[k];
        p.accumulate = accumulate;
        kernels->sine_step(p, z.data(), x.data(), entropy.data(), x.size());
    }
    void observe(std::size_t, std::span<const double> x, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    }
};

// Any other spec: left-point Euler with the coefficient evaluated at (t_k, x).
struct GenericModel {
    const DiffusionSpec* spec;
    const TimeGrid* grid;

    void step(std::size_t k, std::span<double> x, std::span<const double> z, std::span<double> entropy,
              bool accumulate) {
        const double t = (*grid)[k];
        const double dt = grid->dt(k);
        const double sdt = std::sqrt(dt);
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (!inside(x[i])) continue;
            const double s = spec->sigma(t, x[i]);
            if (accumulate) {
                const double s2 = s * s;
                if (!(s2 > 0.0) || !std::isfinite(s2)) {
                    std::ostringstream os;
                    os << "spec '" << spec->id() << "': Sigma = " << s2 << " at t=" << t << ", x=" << x[i]
                       << " on an unabsorbed interval";
                    throw NumericalError(os.str());
                }
                entropy[i] += 0.5 * ((s2 - std::log(s2)) - 1.0) * dt;
            }
            x[i] = std::clamp(x[i] + s * sdt * z[i], 0.0, 1.0);
        }
    }
    void observe(std::size_t, std::span<const double> x, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    }
};

struct BrownianModel {
    double rate;
    const TimeGrid* grid;

    void step(std::size_t k, std::span<double> x, std::span<const double> z, std::span<double> entropy,
              bool accumulate) {
        const double dt = grid->dt(k);
        const double scale = std::sqrt(rate * dt);
        const double c = 0.5 * ((rate - std::log(rate)) - 1.0) * dt;
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] += scale * z[i];
            if (accumulate) entropy[i] += c;
        }
    }
    void observe(std::size_t, std::span<const double> x, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    }
};

void check_x0(double x0) {
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw ParameterError("x0 must lie in [0, 1]");
}

} // namespace

DiffusionSpec::DiffusionSpec(std::string id, SigmaFn sigma) : id_(std::move(id)), sigma_(std::move(sigma)) {
    if (!sigma_) throw ParameterError("DiffusionSpec: empty sigma");
}

DiffusionSpec DiffusionSpec::sine_separable(std::string id, TimeFactorFn time_factor_sq) {
    if (!time_factor_sq) throw ParameterError("DiffusionSpec: empty time factor");
    auto a2 = time_factor_sq;
    DiffusionSpec spec(std::move(id), [a2](double t, double x) {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        return std::sqrt(a2(t)) * std::sin(kPi * x) / kPi;
    });
    spec.time_factor_sq_ = std::move(time_factor_sq);
    return spec;
}

std::vector<double> PathMatrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

unsigned default_thread_count() {
    if (const char* env = std::getenv("WINMART_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

TimeFactorIntegrals integrate_time_factor(const DiffusionSpec& spec, double t0, double t1) {
    if (!spec.is_sine_separable()) throw ParameterError("integrate_time_factor: spec is not sine-separable");
    if (!(t1 > t0)) throw ParameterError("integrate_time_factor: need t1 > t0");
    // Fixed 20-point Gauss-Legendre: a(t) varies little across one step, and
    // the nodes never touch the endpoints, where log a(t)^2 may have an
    // integrable singularity (a(0) = 0 for tau(t) = t^2).
    using boost::math::quadrature::gauss;
    TimeFactorIntegrals r;
    r.var = gauss<double, 20>::integrate([&](double t) { return spec.time_factor_sq(t); }, t0, t1);
    r.log_var = gauss<double, 20>::integrate([&](double t) { return std::log(spec.time_factor_sq(t)); }, t0, t1);
    if (!(r.var > 0.0) || !std::isfinite(r.var) || !std::isfinite(r.log_var))
        throw NumericalError("integrate_time_factor: non-finite integral for spec '" + spec.id() + "'");
    return r;
}

RunResult run_diffusion(const DiffusionSpec& spec, const TimeGrid& grid, double x0, std::size_t n_paths,
                        std::uint64_t seed, const RunRequest& request, unsigned threads) {
    check_x0(x0);
    if (spec.is_sine_separable()) {
        std::vector<simd::SineStepParams> params(grid.n_steps());
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
            const auto integrals = integrate_time_factor(spec, grid[k], grid[k + 1]);
            params[k] = {std::sqrt(integrals.var), integrals.var, grid.dt(k), integrals.log_var, request.entropy};
        }
        const simd::KernelTable* kernels = &simd::active_kernels();
        return detail::run_paths(spec.id(), grid, x0, x0, n_paths, seed, request, threads,
                                 [&] { return SineModel{&params, kernels}; });
    }
    return detail::run_paths(spec.id(), grid, x0, x0, n_paths, seed, request, threads,
                             [&] { return GenericModel{&spec, &grid}; });
}

RunResult run_brownian(double variance_rate, const TimeGrid& grid, double start, std::size_t n_paths,
                       std::uint64_t seed, const RunRequest& request, unsigned threads) {
    if (!(variance_rate > 0.0) || !std::isfinite(variance_rate))
        throw ParameterError("run_brownian: variance_rate must be positive");
    RunRequest req = request;
    req.complete_terminal = false;
    std::ostringstream id;
    id << "brownian:" << variance_rate;
    return detail::run_paths(id.str(), grid, start, start, n_paths, seed, req, threads,
                             [&] { return BrownianModel{variance_rate, &grid}; });
}

PathEnsemble simulate_paths(const DiffusionSpec& spec, const TimeGrid& grid, double x0, std::size_t n_paths,
                            std::uint64_t seed, unsigned threads) {
    RunRequest req;
    req.keep_paths = true;
    RunResult r = run_diffusion(spec, grid, x0, n_paths, seed, req, threads);
    return PathEnsemble{spec.id(), grid, x0, seed, std::move(r.paths), std::move(r.terminal)};
}

BrownianEnsemble simulate_brownian(double variance_rate, const TimeGrid& grid, double start, std::size_t n_paths,
                                   std::uint64_t seed, unsigned threads) {
    RunRequest req;
    req.keep_paths = true;
    RunResult r = run_brownian(variance_rate, grid, start, n_paths, seed, req, threads);
    return BrownianEnsemble{grid, start, variance_rate, seed, std::move(r.paths)};
}

PathMatrix realized_sigma2(const PathMatrix& values, const TimeGrid& grid) {
    if (values.cols() != grid.n_nodes()) throw ParameterError("realized_sigma2: path length does not match grid");
    PathMatrix out(values.rows(), grid.n_steps());
    for (std::size_t p = 0; p < values.rows(); ++p)
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
            const double d = values(p, k + 1) - values(p, k);
            out(p, k) = d * d / grid.dt(k);
        }
    return out;
}

PathMatrix realized_sigma2(const PathEnsemble& ensemble) { return realized_sigma2(ensemble.values, ensemble.grid); }

double terminal_uniform(std::uint64_t seed, std::uint64_t path) {
    const auto w = philox4x32_10(path_counter(0, path, RngStream::Terminal), seed_key(seed));
    return uniform_open01(w[0], w[1]);
}

std::optional<std::string> check_ensemble_invariants(const PathEnsemble& e) {
    std::ostringstream os;
    if (e.values.cols() != e.grid.n_nodes()) return std::string("path length does not match the grid");
    if (!e.terminal.empty() && e.terminal.size() != e.n_paths())
        return std::string("terminal outcome count does not match path count");
    for (std::size_t p = 0; p < e.n_paths(); ++p) {
        auto row = e.values.row(p);
        if (row[0] != e.x0) {
            os << "path " << p << " does not start at x0";
            return os.str();
        }
        std::optional<double> absorbed;
        for (std::size_t k = 0; k < row.size(); ++k) {
            const double v = row[k];
            if (!(v >= 0.0 && v <= 1.0)) {
                os << "path " << p << " node " << k << ": value " << v << " outside [0,1]";
                return os.str();
            }
            if (absorbed && v != *absorbed) {
                os << "path " << p << " node " << k << ": left the absorbing boundary " << *absorbed;
                return os.str();
            }
            if (!inside(v)) absorbed = v;
        }
        if (!e.terminal.empty()) {
            const auto term = e.terminal[p];
            if (term > 1) {
                os << "path " << p << ": terminal outcome " << int(term) << " not in {0,1}";
                return os.str();
            }
            if (absorbed && term != static_cast<std::uint8_t>(*absorbed)) {
                os << "path " << p << ": absorbed at " << *absorbed << " but terminal outcome " << int(term);
                return os.str();
            }
        }
    }
    return std::nullopt;
}

void write_paths_csv(std::ostream& os, const PathMatrix& values, const TimeGrid& grid) {
    const auto old = os.precision(17);
    os << "path,t,value\n";
    for (std::size_t p = 0; p < values.rows(); ++p)
        for (std::size_t k = 0; k < values.cols(); ++k) os << p << ',' << grid[k] << ',' << values(p, k) << '\n';
    os.precision(old);
}

void write_paths_csv(std::ostream& os, const PathEnsemble& ensemble) {
    write_paths_csv(os, ensemble.values, ensemble.grid);
}

void write_terminal_csv(std::ostream& os, const PathEnsemble& ensemble) {
    os << "path,terminal\n";
    for (std::size_t p = 0; p < ensemble.terminal.size(); ++p) os << p << ',' << int(ensemble.terminal[p]) << '\n';
}

} // namespace winmart
