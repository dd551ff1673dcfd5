#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "leaky/krw.hpp"

namespace leaky {

/// Exponent of the contour representation, S(w) = -log(z_+(w) w^a), extended
/// to complex w near the positive real axis.
inline std::complex<double> spectral_S(std::complex<double> w, double d, double a) {
    auto [zm, zp] = z_roots(w, d);
    (void)zm;
    return -std::log(zp) - a * std::log(w);
}

/// Residual of the critical-point equation a = (w - 1/w)/sqrt((4d-w-1/w)^2-4).
inline double critical_residual(double a, double d, double w) {
    double v = 4.0 * d - w - 1.0 / w;
    return (w - 1.0 / w) / std::sqrt(v * v - 4.0) - a;
}

/// Per-direction critical-point package of the uniform Leaky-ASM exponent.
struct SaddleData {
    double a = 0;
    double d = 0;
    double w_plus = 1;   // real critical point in [1, d + sqrt(d^2-1)]
    double w_minus = -1; // companion critical point in (-1, 0]
    double u_plus = 1;   // sqrt(4 a^2 d^2 + (1-a^2)^2)
    double z_cr = 1;     // z_+(w_plus) > 1
    double S_cr = 0;     // S(w_plus) < 0, radial decay rate
    double S_pp = 0;     // S''(w_plus) > 0
    double G_cr = 0;     // G(w_plus) = 1/(w_plus sqrt((4d-w-1/w)^2-4))
};

namespace detail {

inline double newton_polish_wplus(double a, double d, double w) {
    for (int it = 0; it < 3; ++it) {
        double v = 4.0 * d - w - 1.0 / w;
        double disc = v * v - 4.0;
        if (!(disc > 0)) break;
        double s = std::sqrt(disc);
        double g = (w - 1.0 / w) / s - a;
        double vp = -1.0 + 1.0 / (w * w);
        double gp = (1.0 + 1.0 / (w * w)) / s - (w - 1.0 / w) * v * vp / (s * disc);
        if (gp == 0) break;
        double step = g / gp;
        if (!std::isfinite(step)) break;
        w -= step;
    }
    return w;
}

}  // namespace detail

/// Critical points and saddle data for direction a in [0,1] and leakiness d.
/// The closed form for w_+ degenerates (0/0) at a = 1; the exact limit value
/// d + sqrt(d^2 - 1) is used there, with a first-order series plus Newton
/// polish on the window |1 - a| < 1e-6.
inline SaddleData saddle(double a, double d) {
    if (!(d > 1.0)) throw std::invalid_argument("saddle: requires d > 1");
    if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("saddle: requires 0 <= a <= 1");

    SaddleData s;
    s.a = a;
    s.d = d;
    s.u_plus = std::sqrt(4.0 * a * a * d * d + (1.0 - a * a) * (1.0 - a * a));

    if (a == 0.0) {
        s.w_plus = 1.0;
        s.w_minus = -1.0;
    } else if (a == 1.0) {
        s.w_plus = d + std::sqrt(d * d - 1.0);
        s.w_minus = 0.0;
    } else if (1.0 - a < 1e-6) {
        // series in (1-a) around the diagonal, then polish on the exact equation
        double w0 = a * (2.0 * d / (1.0 + a) + std::sqrt(d * d - 1.0));
        s.w_plus = detail::newton_polish_wplus(a, d, w0);
        double um = -s.u_plus;
        s.w_minus = (-2.0 * a * a * d + um + 2.0 * a * std::sqrt(d * d * (1.0 + a * a) - d * um)) /
                    (1.0 - a * a);
    } else {
        double up = s.u_plus, um = -s.u_plus;
        s.w_plus =
            (-2.0 * a * a * d + up + 2.0 * a * std::sqrt(d * d * (1.0 + a * a) - d * up)) / (1.0 - a * a);
        s.w_minus =
            (-2.0 * a * a * d + um + 2.0 * a * std::sqrt(d * d * (1.0 + a * a) - d * um)) / (1.0 - a * a);
        if (1.0 - a < 1e-3) s.w_plus = detail::newton_polish_wplus(a, d, s.w_plus);
    }

    const double w = s.w_plus;
    const double v = 4.0 * d - w - 1.0 / w;
    const double disc = v * v - 4.0;
    const double sq = std::sqrt(disc);
    s.z_cr = 0.5 * (v + sq);
    s.S_cr = -std::log(s.z_cr) - a * std::log(w);
    const double vp2 = (-1.0 + 1.0 / (w * w)) * (-1.0 + 1.0 / (w * w));
    const double z_pp = (-2.0 / sq) * (s.z_cr / (w * w * w) + vp2 / disc);
    s.S_pp = -z_pp / s.z_cr + a * (1.0 + a) / (w * w);
    s.G_cr = 1.0 / (w * sq);
    return s;
}

/// Leading-order saddle-point approximation of log P_d(r, a r):
/// log( c(d-1) G(w+) e^{r S(w+)} / sqrt(2 pi S''(w+) r) ).
inline double pd_asymptotic_log(double r, double a, double d) {
    if (!(r > 0)) throw std::invalid_argument("pd_asymptotic: requires r > 0");
    SaddleData s = saddle(a, d);
    return std::log(4.0 * (d - 1.0)) + std::log(s.G_cr) + r * s.S_cr -
           0.5 * std::log(2.0 * M_PI * s.S_pp * r);
}

/// The four solutions of (4d - w - 1/w)^2 = 4, sorted ascending. They pair
/// into radical conjugates: w1 w4 = 1 and w2 w3 = 1.
inline std::array<double, 4> branch_points(double d) {
    if (!(d > 1.0)) throw std::invalid_argument("branch_points: requires d > 1");
    return {2.0 * d + 1.0 - 2.0 * std::sqrt(d * (d + 1.0)), 2.0 * d - 1.0 - 2.0 * std::sqrt(d * (d - 1.0)),
            2.0 * d - 1.0 + 2.0 * std::sqrt(d * (d - 1.0)), 2.0 * d + 1.0 + 2.0 * std::sqrt(d * (d + 1.0))};
}

}  // namespace leaky
