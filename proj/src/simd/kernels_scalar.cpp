#include "simd/kernels_detail.hpp"

#include "winmart/rng.hpp"

// clang-format off
#include "simd/backend_scalar.hpp"
#include "simd/vmath.hpp"
// clang-format on

namespace winmart::simd {
namespace detail {

void normal_pair_scalar(std::uint64_t seed, std::uint64_t pair, std::uint64_t first_path, std::size_t n,
                        double* even, double* odd) {
    const PhiloxKey key = seed_key(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = philox4x32_10(path_counter(pair, first_path + i, RngStream::Increments), key);
        const double u1 = uniform_open01(w[0], w[1]);
        const double u2 = uniform_open01(w[2], w[3]);
        vmath::box_muller(u1, u2, even[i], odd[i]);
    }
}

void uniform_scalar(std::uint64_t seed, std::uint32_t stream, std::uint64_t index, std::uint64_t first_path,
                    std::size_t n, double* out) {
    const PhiloxKey key = seed_key(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = philox4x32_10(path_counter(index, first_path + i, static_cast<RngStream>(stream)), key);
        out[i] = uniform_open01(w[0], w[1]);
    }
}

void sine_step_scalar(const SineStepParams& p, const double* z, double* x, double* entropy, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double c = vmath::sine_step(x[i], z[i], p.sqrt_var, p.var, p.dt, p.log_var_integral, p.accumulate);
        if (p.accumulate) entropy[i] += c;
    }
}

void entropy_integrand_scalar(const double* sigma2, const double* dt, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = vmath::entropy_integrand(sigma2[i], dt[i]);
}

void sinpi_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = vmath::sinpi(x[i]);
}

void log_scalar(const double* x, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = vmath::log(x[i]);
}

} // namespace detail

const KernelTable& scalar_kernels() {
    static const KernelTable table{
        KernelKind::Scalar,      "scalar",
        detail::normal_pair_scalar, detail::uniform_scalar,
        detail::sine_step_scalar,   detail::entropy_integrand_scalar,
        detail::sinpi_scalar,       detail::log_scalar,
    };
    return table;
}

} // namespace winmart::simd
