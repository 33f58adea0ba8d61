#pragma once

// Scalar backend: V = double, M = bool. Must be included before vmath.hpp.

#include <bit>
#include <cmath>
#include <cstdint>

namespace winmart::simd::vmath {

inline double vselect(bool m, double a, double b) { return m ? a : b; }
inline double vmin(double a, double b) { return b < a ? b : a; }
inline double vmax(double a, double b) { return a < b ? b : a; }
inline double vsqrt(double x) { return std::sqrt(x); }
inline double vround(double x) { return std::nearbyint(x); }
inline double vfloor(double x) { return std::floor(x); }

inline void vsplit(double x, double& mantissa, double& exponent) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    const auto biased = static_cast<std::int64_t>((bits >> 52) & 0x7ffu);
    mantissa = std::bit_cast<double>((bits & 0x000fffffffffffffull) | 0x3ff0000000000000ull);
    exponent = static_cast<double>(biased - 1023);
}

} // namespace winmart::simd::vmath
