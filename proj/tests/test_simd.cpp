#include <cmath>
#include <cstring>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "winmart/rng.hpp"
#include "winmart/simd/kernels.hpp"

using namespace winmart;
using simd::KernelTable;

namespace {

std::uint64_t bits(double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, sizeof u);
    return u;
}

// Every lane of `a` equals `b` bit for bit (NaN patterns included).
void require_identical(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        INFO("lane " << i << ": " << a[i] << " vs " << b[i]);
        REQUIRE(bits(a[i]) == bits(b[i]));
    }
}

// Inputs with awkward sizes so the vector body and the scalar tail both run.
constexpr std::size_t kOddSize = 1027;

std::vector<double> spread(double lo, double hi, std::size_t n, std::uint64_t seed) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto w = philox4x32_10({static_cast<std::uint32_t>(i), 0, 0, 0}, seed_key(seed));
        v[i] = lo + (hi - lo) * uniform_open01(w[0], w[1]);
    }
    return v;
}

const KernelTable* wide() { return simd::avx2_kernels(); }

} // namespace

TEST_CASE("philox4x32-10 known answers") {
    // Reference vectors distributed with Random123.
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    CHECK(philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}) ==
          PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    CHECK(philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}) ==
          PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("uniform_open01 excludes both endpoints") {
    CHECK(uniform_open01(0, 0) > 0.0);
    CHECK(uniform_open01(0xffffffffu, 0xffffffffu) < 1.0);
}

TEST_CASE("scalar sinpi and log are accurate against long double") {
    const KernelTable& k = simd::scalar_kernels();
    const std::vector<double> x = spread(-3.0, 3.0, kOddSize, 1);
    std::vector<double> out(x.size());
    k.sinpi(x.data(), out.data(), x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const long double ref = std::sin(3.141592653589793238462643383279502884L * static_cast<long double>(x[i]));
        CHECK(std::abs(static_cast<long double>(out[i]) - ref) <= 4e-16L);
    }
    const std::vector<double> pos = spread(1e-300, 1e3, kOddSize, 2);
    k.log(pos.data(), out.data(), pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i) {
        const long double ref = std::log(static_cast<long double>(pos[i]));
        CHECK(std::abs(static_cast<long double>(out[i]) - ref) <= 2.5e-16L * std::max(1.0L, std::abs(ref)));
    }
    // Exact special points.
    const double special[] = {0.0, 0.5, 1.0, 1.5, 2.0};
    double s[5];
    k.sinpi(special, s, 5);
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 1.0);
    CHECK(s[2] == 0.0);
    CHECK(s[3] == -1.0);
    const double one = 1.0;
    double l;
    k.log(&one, &l, 1);
    CHECK(l == 0.0);
}

TEST_CASE("avx2 kernels are bit-identical to the scalar reference") {
    if (wide() == nullptr) {
        MESSAGE("AVX2 unavailable; equivalence not exercised");
        return;
    }
    const KernelTable& s = simd::scalar_kernels();
    const KernelTable& v = *wide();
    CHECK(v.kind == simd::KernelKind::Avx2);

    SUBCASE("sinpi") {
        for (auto [lo, hi] : {std::pair{-4.0, 4.0}, std::pair{0.0, 1.0}, std::pair{-1e-9, 1e-9}}) {
            const auto x = spread(lo, hi, kOddSize, 3);
            std::vector<double> a(x.size()), b(x.size());
            s.sinpi(x.data(), a.data(), x.size());
            v.sinpi(x.data(), b.data(), x.size());
            require_identical(a, b);
        }
    }
    SUBCASE("log") {
        for (auto [lo, hi] : {std::pair{1e-310, 1e-300}, std::pair{0.5, 2.0}, std::pair{1.0, 1e300}}) {
            const auto x = spread(lo, hi, kOddSize, 4);
            std::vector<double> a(x.size()), b(x.size());
            s.log(x.data(), a.data(), x.size());
            v.log(x.data(), b.data(), x.size());
            require_identical(a, b);
        }
    }
    SUBCASE("normal_pair") {
        for (std::uint64_t first : {0ull, 5ull, (1ull << 32) + 3}) {
            std::vector<double> e1(kOddSize), o1(kOddSize), e2(kOddSize), o2(kOddSize);
            s.normal_pair(99, 17, first, kOddSize, e1.data(), o1.data());
            v.normal_pair(99, 17, first, kOddSize, e2.data(), o2.data());
            require_identical(e1, e2);
            require_identical(o1, o2);
        }
    }
    SUBCASE("uniform") {
        std::vector<double> a(kOddSize), b(kOddSize);
        s.uniform(7, static_cast<std::uint32_t>(RngStream::Terminal), 0, 11, kOddSize, a.data());
        v.uniform(7, static_cast<std::uint32_t>(RngStream::Terminal), 0, 11, kOddSize, b.data());
        require_identical(a, b);
    }
    SUBCASE("entropy_integrand") {
        const auto s2 = spread(1e-8, 50.0, kOddSize, 5);
        const auto dt = spread(1e-9, 1e-2, kOddSize, 6);
        std::vector<double> a(kOddSize), b(kOddSize);
        s.entropy_integrand(s2.data(), dt.data(), a.data(), kOddSize);
        v.entropy_integrand(s2.data(), dt.data(), b.data(), kOddSize);
        require_identical(a, b);
    }
    SUBCASE("sine_step, including clamping and absorbed lanes") {
        auto x = spread(0.0, 1.0, kOddSize, 7);
        x[0] = 0.0;
        x[1] = 1.0;
        x[2] = 1e-12;
        x[3] = 1.0 - 1e-12;
        std::vector<double> z(kOddSize), odd(kOddSize);
        s.normal_pair(1, 0, 0, kOddSize, z.data(), odd.data());
        z[2] = -8.0;
        z[3] = 8.0;
        for (double var : {1e-4, 0.5, 40.0}) {
            simd::SineStepParams p;
            p.var = var;
            p.sqrt_var = std::sqrt(var);
            p.dt = 1e-3;
            p.log_var_integral = std::log(var) * p.dt;
            std::vector<double> xa = x, xb = x, ea(kOddSize, 0.25), eb(kOddSize, 0.25);
            s.sine_step(p, z.data(), xa.data(), ea.data(), kOddSize);
            v.sine_step(p, z.data(), xb.data(), eb.data(), kOddSize);
            require_identical(xa, xb);
            require_identical(ea, eb);
            for (double m : xa) CHECK((m >= 0.0 && m <= 1.0));
            CHECK(xa[0] == 0.0);
            CHECK(xa[1] == 1.0);
            CHECK(ea[0] == 0.25); // absorbed lanes accumulate nothing
        }
    }
}

TEST_CASE("box-muller normals have unit moments") {
    const KernelTable& k = simd::active_kernels();
    const std::size_t n = 200000;
    std::vector<double> e(n), o(n);
    k.normal_pair(2024, 3, 0, n, e.data(), o.data());
    double m = 0, v = 0, c = 0;
    for (std::size_t i = 0; i < n; ++i) {
        m += e[i] + o[i];
        v += e[i] * e[i] + o[i] * o[i];
        c += e[i] * o[i];
    }
    m /= 2.0 * n;
    v /= 2.0 * n;
    c /= n;
    CHECK(std::abs(m) < 4.0 / std::sqrt(2.0 * n));
    CHECK(std::abs(v - 1.0) < 4.0 * std::sqrt(2.0 / (2.0 * n)));
    CHECK(std::abs(c) < 4.0 / std::sqrt(static_cast<double>(n)));
}
