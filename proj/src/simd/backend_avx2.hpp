#pragma once

// AVX2 backend: four doubles per register. Only include from translation
// units compiled with -mavx2.

#include <immintrin.h>

#include <cstdint>

namespace winmart::simd::vmath {

struct Md {
    __m256d m;
};

struct Vd {
    __m256d v;
    Vd() = default;
    explicit Vd(__m256d x) : v(x) {}
    Vd(double c) : v(_mm256_set1_pd(c)) {} // NOLINT: splat, mirrors double(c)

    static Vd load(const double* p) { return Vd(_mm256_loadu_pd(p)); }
    void store(double* p) const { _mm256_storeu_pd(p, v); }
};

inline Vd operator+(Vd a, Vd b) { return Vd(_mm256_add_pd(a.v, b.v)); }
inline Vd operator-(Vd a, Vd b) { return Vd(_mm256_sub_pd(a.v, b.v)); }
inline Vd operator*(Vd a, Vd b) { return Vd(_mm256_mul_pd(a.v, b.v)); }
inline Vd operator/(Vd a, Vd b) { return Vd(_mm256_div_pd(a.v, b.v)); }
inline Md operator<(Vd a, Vd b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ)}; }
inline Md operator>(Vd a, Vd b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ)}; }
inline Md operator==(Vd a, Vd b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_EQ_OQ)}; }
inline Md operator&(Md a, Md b) { return {_mm256_and_pd(a.m, b.m)}; }
inline Md operator|(Md a, Md b) { return {_mm256_or_pd(a.m, b.m)}; }

inline Vd vselect(Md m, Vd a, Vd b) { return Vd(_mm256_blendv_pd(b.v, a.v, m.m)); }
// Operand order matches the scalar (b < a ? b : a) so NaN handling agrees.
inline Vd vmin(Vd a, Vd b) { return Vd(_mm256_min_pd(b.v, a.v)); }
inline Vd vmax(Vd a, Vd b) { return Vd(_mm256_max_pd(b.v, a.v)); }
inline Vd vsqrt(Vd x) { return Vd(_mm256_sqrt_pd(x.v)); }
inline Vd vround(Vd x) { return Vd(_mm256_round_pd(x.v, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC)); }
inline Vd vfloor(Vd x) { return Vd(_mm256_floor_pd(x.v)); }

// Exact conversion of non-negative integers below 2^52 held in 64-bit lanes.
inline __m256d u52_to_double(__m256i u) {
    const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll); // 2^52
    return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(u, magic)), _mm256_castsi256_pd(magic));
}

inline void vsplit(Vd x, Vd& mantissa, Vd& exponent) {
    const __m256i bits = _mm256_castpd_si256(x.v);
    const __m256i biased = _mm256_and_si256(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(0x7ff));
    const __m256i frac = _mm256_and_si256(bits, _mm256_set1_epi64x(0x000fffffffffffffll));
    mantissa = Vd(_mm256_castsi256_pd(_mm256_or_si256(frac, _mm256_set1_epi64x(0x3ff0000000000000ll))));
    exponent = Vd(_mm256_sub_pd(u52_to_double(biased), _mm256_set1_pd(1023.0)));
}

} // namespace winmart::simd::vmath
