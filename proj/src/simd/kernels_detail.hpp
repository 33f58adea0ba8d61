#pragma once

#include <cstddef>
#include <cstdint>

#include "winmart/simd/kernels.hpp"

// Scalar entry points, shared with wider backends for loop tails.
namespace winmart::simd::detail {

void normal_pair_scalar(std::uint64_t seed, std::uint64_t pair, std::uint64_t first_path, std::size_t n,
                        double* even, double* odd);
void uniform_scalar(std::uint64_t seed, std::uint32_t stream, std::uint64_t index, std::uint64_t first_path,
                    std::size_t n, double* out);
void sine_step_scalar(const SineStepParams& p, const double* z, double* x, double* entropy, std::size_t n);
void entropy_integrand_scalar(const double* sigma2, const double* dt, double* out, std::size_t n);
void sinpi_scalar(const double* x, double* out, std::size_t n);
void log_scalar(const double* x, double* out, std::size_t n);

#if defined(WINMART_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

} // namespace winmart::simd::detail
