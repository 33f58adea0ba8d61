#include "simd/kernels_detail.hpp"

#include "winmart/rng.hpp"

// clang-format off
#include "simd/backend_scalar.hpp"
#include "simd/backend_avx2.hpp"
#include "simd/vmath.hpp"
// clang-format on

namespace winmart::simd::detail {
namespace {

using vmath::Vd;

constexpr std::size_t kLanes = 4;

// Four Philox4x32-10 instances, one per 64-bit lane; each lane holds a
// 32-bit word in its low half.
struct PhiloxLanes {
    __m256i w[4];
};

PhiloxLanes philox_lanes(std::uint32_t c0, std::uint64_t first_path, std::uint32_t c3, PhiloxKey key) {
    const __m256i mask32 = _mm256_set1_epi64x(0xffffffffll);
    const __m256i paths = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(first_path)),
                                           _mm256_set_epi64x(3, 2, 1, 0));
    __m256i ctr0 = _mm256_set1_epi64x(c0);
    __m256i ctr1 = _mm256_and_si256(paths, mask32);
    __m256i ctr2 = _mm256_srli_epi64(paths, 32);
    __m256i ctr3 = _mm256_set1_epi64x(c3);
    const __m256i m0 = _mm256_set1_epi64x(kPhiloxM0);
    const __m256i m1 = _mm256_set1_epi64x(kPhiloxM1);
    for (int round = 0; round < 10; ++round) {
        const __m256i k0 = _mm256_set1_epi64x(key[0]);
        const __m256i k1 = _mm256_set1_epi64x(key[1]);
        const __m256i p0 = _mm256_mul_epu32(ctr0, m0);
        const __m256i p1 = _mm256_mul_epu32(ctr2, m1);
        const __m256i hi0 = _mm256_srli_epi64(p0, 32), lo0 = _mm256_and_si256(p0, mask32);
        const __m256i hi1 = _mm256_srli_epi64(p1, 32), lo1 = _mm256_and_si256(p1, mask32);
        ctr0 = _mm256_xor_si256(_mm256_xor_si256(hi1, ctr1), k0);
        ctr1 = lo1;
        ctr2 = _mm256_xor_si256(_mm256_xor_si256(hi0, ctr3), k1);
        ctr3 = lo0;
        key[0] += kPhiloxW0;
        key[1] += kPhiloxW1;
    }
    return {{ctr0, ctr1, ctr2, ctr3}};
}

// Same arithmetic as uniform_open01.
Vd uniform_lanes(__m256i lo, __m256i hi) {
    const Vd high(vmath::u52_to_double(_mm256_srli_epi64(hi, 12)));
    const Vd low(vmath::u52_to_double(lo));
    return (high * Vd(0x1p32) + low + Vd(0.5)) * Vd(0x1p-52);
}

void normal_pair_avx2(std::uint64_t seed, std::uint64_t pair, std::uint64_t first_path, std::size_t n,
                      double* even, double* odd) {
    const PhiloxKey key = seed_key(seed);
    const auto c0 = static_cast<std::uint32_t>(pair);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const PhiloxLanes w = philox_lanes(c0, first_path + i, static_cast<std::uint32_t>(RngStream::Increments), key);
        Vd z0, z1;
        vmath::box_muller(uniform_lanes(w.w[0], w.w[1]), uniform_lanes(w.w[2], w.w[3]), z0, z1);
        z0.store(even + i);
        z1.store(odd + i);
    }
    normal_pair_scalar(seed, pair, first_path + i, n - i, even + i, odd + i);
}

void uniform_avx2(std::uint64_t seed, std::uint32_t stream, std::uint64_t index, std::uint64_t first_path,
                  std::size_t n, double* out) {
    const PhiloxKey key = seed_key(seed);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        const PhiloxLanes w = philox_lanes(static_cast<std::uint32_t>(index), first_path + i, stream, key);
        uniform_lanes(w.w[0], w.w[1]).store(out + i);
    }
    uniform_scalar(seed, stream, index, first_path + i, n - i, out + i);
}

void sine_step_avx2(const SineStepParams& p, const double* z, double* x, double* entropy, std::size_t n) {
    const Vd sqrt_var(p.sqrt_var), var(p.var), dt(p.dt), lvi(p.log_var_integral);
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        Vd xi = Vd::load(x + i);
        const Vd c = vmath::sine_step(xi, Vd::load(z + i), sqrt_var, var, dt, lvi, p.accumulate);
        xi.store(x + i);
        if (p.accumulate) (Vd::load(entropy + i) + c).store(entropy + i);
    }
    sine_step_scalar(p, z + i, x + i, entropy ? entropy + i : nullptr, n - i);
}

void entropy_integrand_avx2(const double* sigma2, const double* dt, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes)
        vmath::entropy_integrand(Vd::load(sigma2 + i), Vd::load(dt + i)).store(out + i);
    entropy_integrand_scalar(sigma2 + i, dt + i, out + i, n - i);
}

void sinpi_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) vmath::sinpi(Vd::load(x + i)).store(out + i);
    sinpi_scalar(x + i, out + i, n - i);
}

void log_avx2(const double* x, double* out, std::size_t n) {
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) vmath::log(Vd::load(x + i)).store(out + i);
    log_scalar(x + i, out + i, n - i);
}

} // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{
        KernelKind::Avx2,  "avx2",
        normal_pair_avx2,  uniform_avx2,
        sine_step_avx2,    entropy_integrand_avx2,
        sinpi_avx2,        log_avx2,
    };
    return table;
}

} // namespace winmart::simd::detail
