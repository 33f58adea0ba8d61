#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace winmart::simd {

enum class KernelKind { Scalar, Avx2 };

// Per-interval coefficients for the fused win-martingale step with spatial
// shape g(x) = sin(pi x) / pi and time factor a(t):
//   var            = integral of a(t)^2 over the interval
//   dt             = interval length
//   log_var_integral = integral of log a(t)^2 over the interval
struct SineStepParams {
    double sqrt_var = 0.0;
    double var = 0.0;
    double dt = 0.0;
    double log_var_integral = 0.0;
    bool accumulate = true;
};

struct KernelTable {
    KernelKind kind;
    const char* name;

    // Standard normals for increments 2*pair and 2*pair+1 of paths
    // [first_path, first_path + n).
    void (*normal_pair)(std::uint64_t seed, std::uint64_t pair, std::uint64_t first_path,
                        std::size_t n, double* even, double* odd);

    // Uniform (0,1) draws of a given stream, one per path.
    void (*uniform)(std::uint64_t seed, std::uint32_t stream, std::uint64_t index,
                    std::uint64_t first_path, std::size_t n, double* out);

    // One clamped Euler step for every path; optionally accumulates the
    // interval's specific-entropy contribution for paths strictly inside (0,1).
    void (*sine_step)(const SineStepParams& p, const double* z, double* x, double* entropy,
                      std::size_t n);

    // out[i] = 0.5 * (s - log s - 1) * dt[i] with s = sigma2[i] > 0.
    void (*entropy_integrand)(const double* sigma2, const double* dt, double* out, std::size_t n);

    // Elementwise primitives, exposed for accuracy tests.
    void (*sinpi)(const double* x, double* out, std::size_t n);
    void (*log)(const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_kernels();

// Null when the binary was built without AVX2 support or the CPU lacks it.
const KernelTable* avx2_kernels();

// Kernel table picked at first use: the widest supported by the CPU, unless
// WINMART_KERNEL=scalar is set. All tables produce bit-identical results.
const KernelTable& active_kernels();

std::string to_string(KernelKind kind);

} // namespace winmart::simd
