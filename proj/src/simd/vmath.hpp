#pragma once

// Width-agnostic math used by every kernel backend. Each routine is written
// once against a value type V (plain double, or a SIMD wrapper providing the
// same operator set), so all backends execute the same IEEE operation
// sequence and round identically. Requires -ffp-contract=off.
//
// A backend provides, for its V and mask type M:
//   arithmetic + - * /, comparisons returning M, mask & |,
//   vselect(M, V, V), vmin, vmax, vsqrt, vround (nearest, ties to even),
//   vfloor, and vsplit(x, mantissa, exponent) for finite x > 0 returning
//   mantissa in [1, 2) and the unbiased exponent as a double.

namespace winmart::simd::vmath {

// Coefficients of the fdlibm kernels (__kernel_sin, __kernel_cos, __ieee754_log).
inline constexpr double kS1 = -1.66666666666666324348e-01;
inline constexpr double kS2 = 8.33333333332248946124e-03;
inline constexpr double kS3 = -1.98412698298579493134e-04;
inline constexpr double kS4 = 2.75573137070700676789e-06;
inline constexpr double kS5 = -2.50507602534068634195e-08;
inline constexpr double kS6 = 1.58969099521155010221e-10;

inline constexpr double kC1 = 4.16666666666666019037e-02;
inline constexpr double kC2 = -1.38888888888741095749e-03;
inline constexpr double kC3 = 2.48015872894767294178e-05;
inline constexpr double kC4 = -2.75573143513906633035e-07;
inline constexpr double kC5 = 2.08757232129817482790e-09;
inline constexpr double kC6 = -1.13596475577881948265e-11;

inline constexpr double kLg1 = 6.666666666666735130e-01;
inline constexpr double kLg2 = 3.999999999940941908e-01;
inline constexpr double kLg3 = 2.857142874366239149e-01;
inline constexpr double kLg4 = 2.222219843214978396e-01;
inline constexpr double kLg5 = 1.818357216161805012e-01;
inline constexpr double kLg6 = 1.531383769920937332e-01;
inline constexpr double kLg7 = 1.479819860511658591e-01;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;

inline constexpr double kPi = 3.14159265358979311600e+00;
inline constexpr double kInvPi = 3.18309886183790691216e-01;
inline constexpr double kSqrtHalf = 7.07106781186547524401e-01;
inline constexpr double kSmallestNormal = 2.2250738585072014e-308;

// sin and cos on |r| <= pi/4.
template <class V>
inline V kernel_sin(V r) {
    const V z = r * r;
    const V v = z * r;
    const V p = V(kS2) + z * (V(kS3) + z * (V(kS4) + z * (V(kS5) + z * V(kS6))));
    return r + v * (V(kS1) + z * p);
}

template <class V>
inline V kernel_cos(V r) {
    const V z = r * r;
    const V p = z * (V(kC1) + z * (V(kC2) + z * (V(kC3) + z * (V(kC4) + z * (V(kC5) + z * V(kC6))))));
    const V hz = V(0.5) * z;
    const V w = V(1.0) - hz;
    return w + (((V(1.0) - w) - hz) + z * p);
}

// sin(pi x) and cos(pi x) for |x| <= 2^51. The reduction x - n/2 is exact.
template <class V>
inline void sincospi(V x, V& s, V& c) {
    const V n = vround(x + x);
    const V r = x - n * V(0.5);
    const V theta = r * V(kPi);
    const V sr = kernel_sin(theta);
    const V cr = kernel_cos(theta);
    const V q = n - V(4.0) * vfloor(n * V(0.25)); // quadrant in {0,1,2,3}
    const auto q1 = q == V(1.0);
    const auto q2 = q == V(2.0);
    const auto q3 = q == V(3.0);
    // quadrant 0: ( sr,  cr)  1: ( cr, -sr)  2: (-sr, -cr)  3: (-cr,  sr)
    s = vselect(q1, cr, vselect(q2, V(0.0) - sr, vselect(q3, V(0.0) - cr, sr)));
    c = vselect(q1, V(0.0) - sr, vselect(q2, V(0.0) - cr, vselect(q3, sr, cr)));
}

template <class V>
inline V sinpi(V x) {
    V s, c;
    sincospi(x, s, c);
    return s;
}

// Natural logarithm for finite x > 0 (subnormals included).
template <class V>
inline V log(V x) {
    const auto tiny = x < V(kSmallestNormal);
    x = vselect(tiny, x * V(0x1p54), x);
    V m, k;
    vsplit(x, m, k);
    k = vselect(tiny, k - V(54.0), k);
    // m in [sqrt(1/2), sqrt(2))
    const auto big = m > V(2.0 * kSqrtHalf);
    m = vselect(big, m * V(0.5), m);
    k = vselect(big, k + V(1.0), k);
    const V f = m - V(1.0);
    const V hfsq = V(0.5) * f * f;
    const V s = f / (V(2.0) + f);
    const V z = s * s;
    const V w = z * z;
    const V t1 = w * (V(kLg2) + w * (V(kLg4) + w * V(kLg6)));
    const V t2 = z * (V(kLg1) + w * (V(kLg3) + w * (V(kLg5) + w * V(kLg7))));
    const V r = t2 + t1;
    return k * V(kLn2Hi) - ((hfsq - (s * (hfsq + r) + k * V(kLn2Lo))) - f);
}

// Box-Muller on two open-interval uniforms.
template <class V>
inline void box_muller(V u1, V u2, V& z0, V& z1) {
    const V radius = vsqrt(V(-2.0) * log(u1));
    V s, c;
    sincospi(u2 + u2, s, c);
    z0 = radius * c;
    z1 = radius * s;
}

// Entropy integrand 0.5 * (s - log s - 1) * dt.
template <class V>
inline V entropy_integrand(V sigma2, V dt) {
    return V(0.5) * (((sigma2 - log(sigma2)) - V(1.0)) * dt);
}

// log(pi^2) as 2*log(pi) through the shared log, so every backend sees the
// same constant.
inline double two_log_pi() {
    static const double value = [] {
        const double lp = log(kPi);
        return lp + lp;
    }();
    return value;
}

// Clamped Euler step for dM = a(t) sin(pi M)/pi dB on one interval.
// Returns the entropy contribution of the interval (zero for absorbed lanes).
template <class V>
inline V sine_step(V& x, V z, V sqrt_var, V var, V dt, V log_var_integral, bool accumulate) {
    const auto alive = (x > V(0.0)) & (x < V(1.0));
    const V s = sinpi(x);
    const V g = s * V(kInvPi);
    V contribution = V(0.0);
    if (accumulate) {
        const V ls = log(vselect(alive, s, V(1.0)));
        const V log_g2 = (ls + ls) - V(two_log_pi());
        const V c = V(0.5) * ((((g * g) * var - dt * log_g2) - log_var_integral) - dt);
        contribution = vselect(alive, c, V(0.0));
    }
    V next = x + (g * sqrt_var) * z;
    next = vmin(vmax(next, V(0.0)), V(1.0));
    x = vselect(alive, next, x);
    return contribution;
}

} // namespace winmart::simd::vmath
