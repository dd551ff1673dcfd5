#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "leaky/saddle.hpp"

namespace leaky {

struct CurveSample {
    double a = 0;
    double x = 0;
    double y = 0;
};

/// Sampled limit-shape curve. `octant` holds the primitive parameter range;
/// `closed` is the full reflected closed polyline, counter-clockwise.
struct LimitCurve {
    double d = 0;
    std::vector<CurveSample> octant;
    std::vector<std::pair<double, double>> closed;
    std::string normalization = "unit-1/|S|";
};

namespace detail {

// Closes an increasing-angle arc of the first octant (uniform model) under the
// 8 dihedral symmetries, dropping duplicated seam points.
inline std::vector<std::pair<double, double>> close_octant(const std::vector<CurveSample>& oct) {
    std::vector<std::pair<double, double>> pts;
    auto push = [&](double x, double y) {
        if (!pts.empty() && std::abs(pts.back().first - x) < 1e-15 &&
            std::abs(pts.back().second - y) < 1e-15)
            return;
        pts.emplace_back(x, y);
    };
    for (const auto& s : oct) push(s.x, s.y);                                     // 0..45 deg
    for (auto it = oct.rbegin(); it != oct.rend(); ++it) push(it->y, it->x);      // 45..90
    for (auto it = oct.begin(); it != oct.end(); ++it) push(-it->y, it->x);       // 90..135
    for (auto it = oct.rbegin(); it != oct.rend(); ++it) push(-it->x, it->y);     // 135..180
    for (auto it = oct.begin(); it != oct.end(); ++it) push(-it->x, -it->y);      // 180..225
    for (auto it = oct.rbegin(); it != oct.rend(); ++it) push(-it->y, -it->x);    // 225..270
    for (auto it = oct.begin(); it != oct.end(); ++it) push(it->y, -it->x);       // 270..315
    for (auto it = oct.rbegin(); it != oct.rend(); ++it) push(it->x, -it->y);     // 315..360
    if (!pts.empty() && std::abs(pts.front().first - pts.back().first) < 1e-15 &&
        std::abs(pts.front().second - pts.back().second) < 1e-15)
        pts.pop_back();
    return pts;
}

}  // namespace detail

/// Limit shape of the uniform Leaky-ASM in 1/|S| units: the first-octant arc
/// -(1/S(w+), a/S(w+)) for a in [0, 1] plus its dihedral reflections.
inline LimitCurve limit_curve(double d, int n_samples) {
    if (n_samples < 2) throw std::invalid_argument("limit_curve: need at least 2 samples");
    LimitCurve c;
    c.d = d;
    for (int i = 0; i < n_samples; ++i) {
        double a = static_cast<double>(i) / (n_samples - 1);
        SaddleData s = saddle(a, d);
        c.octant.push_back({a, -1.0 / s.S_cr, -a / s.S_cr});
    }
    c.closed = detail::close_octant(c.octant);
    return c;
}

/// 2-directional exponent g(a) = log( a^{-a} ((1+a)/(2d))^{1+a} ); g(0) is the
/// a^a -> 1 limit.
inline double ne_exponent(double a, double d) {
    double alog = (a <= 0.0) ? 0.0 : a * std::log(a);
    return -(1.0 + a) * std::log(2.0 * d) + (1.0 + a) * std::log1p(a) - alog;
}

/// Limit shape of the north-east model: (-1/g(a), -a/g(a)) for a in [0,1] and
/// its reflection about y = x; the shape lives in the closed positive quadrant.
inline LimitCurve ne_curve(double d, int n_samples) {
    if (!(d > 1.0)) throw std::invalid_argument("ne_curve: requires d > 1");
    if (n_samples < 2) throw std::invalid_argument("ne_curve: need at least 2 samples");
    LimitCurve c;
    c.d = d;
    c.normalization = "unit-1/|g|";
    for (int i = 0; i < n_samples; ++i) {
        double a = static_cast<double>(i) / (n_samples - 1);
        double g = ne_exponent(a, d);
        c.octant.push_back({a, -1.0 / g, -a / g});
    }
    for (const auto& s : c.octant) c.closed.emplace_back(s.x, s.y);
    for (auto it = c.octant.rbegin() + 1; it != c.octant.rend(); ++it)
        c.closed.emplace_back(it->y, it->x);
    return c;
}

/// Inner/outer radius band of the visited region in direction a, from the
/// saddle asymptotics with the log n - (1/2) log log n scaling; the paper's
/// vanishing corrections q_o, q_i are set to zero.
struct RadialBandEntry {
    double a = 0;
    double r_inner = 0;
    double r_outer = 0;
};

struct RadialBand {
    double n = 0;
    double d = 0;
    std::vector<RadialBandEntry> entries;
};

inline RadialBand radial_band(double n, double d, int n_samples = 65) {
    if (!(n >= 3.0)) throw std::invalid_argument("radial_band: requires n >= 3");
    RadialBand band;
    band.n = n;
    band.d = d;
    const double L = std::log(n) - 0.5 * std::log(std::log(n));
    for (int i = 0; i < n_samples; ++i) {
        double a = static_cast<double>(i) / (n_samples - 1);
        SaddleData s = saddle(a, d);
        const double Sa = -s.S_cr;
        const double C = std::log(std::sqrt(2.0 * M_PI * s.S_pp / Sa) / s.G_cr);
        RadialBandEntry e;
        e.a = a;
        e.r_outer = (L - C) / Sa;
        e.r_inner = (L - C - std::log(d / (d - 1.0))) / Sa;
        band.entries.push_back(e);
    }
    return band;
}

/// Level-set radius: solves r|S| + C + (1/2) log r = log n - log(kappa) for r,
/// i.e. the radius where the saddle asymptotic of P_d crosses kappa * c(d-1)/n
/// (kappa = 1 outer, kappa = d/(d-1) inner).
inline double saddle_level_radius(double n, double d, double a, double kappa) {
    SaddleData s = saddle(a, d);
    const double Sa = -s.S_cr;
    const double rhs = std::log(n) - std::log(kappa) + std::log(s.G_cr) -
                       0.5 * std::log(2.0 * M_PI * s.S_pp);
    double r = std::max(rhs, 1.0) / Sa;
    for (int it = 0; it < 60; ++it) {
        double f = Sa * r + 0.5 * std::log(r) - rhs;
        double fp = Sa + 0.5 / r;
        double step = f / fp;
        r -= step;
        if (r <= 0) r = 1e-6;
        if (std::abs(step) < 1e-12 * std::max(1.0, r)) break;
    }
    return r;
}

/// Vanishing-leakiness band (d = 1 + t): lattice-parameter radii per direction
/// and the inner/outer ratio 1 + log t / log n. In Euclidean norm the outer
/// curve is the circle of radius log(n)/(2 sqrt(t)).
struct LeakBandEntry {
    double a = 0;
    double r_inner = 0;
    double r_outer = 0;
};

struct LeakToZeroBand {
    double n = 0;
    double t = 0;
    bool inner_valid = false;  // requires n t >> 1
    double ratio = 0;          // r_i / r_o -> 1 + log t / log n
    double outer_euclid = 0;   // log(n) / (2 sqrt(t)), direction-independent
    std::vector<LeakBandEntry> entries;
};

inline LeakToZeroBand leak_to_zero_band(double n, double t, int n_samples = 65) {
    if (!(t > 0.0 && t < 1.0)) throw std::invalid_argument("leak_to_zero_band: requires 0 < t < 1");
    if (!(n > 1.0)) throw std::invalid_argument("leak_to_zero_band: requires n > 1");
    LeakToZeroBand band;
    band.n = n;
    band.t = t;
    band.inner_valid = n * t > 1.0;
    band.outer_euclid = std::log(n) / (2.0 * std::sqrt(t));
    band.ratio = band.inner_valid ? 1.0 + std::log(t) / std::log(n) : 0.0;
    for (int i = 0; i < n_samples; ++i) {
        double a = static_cast<double>(i) / (n_samples - 1);
        LeakBandEntry e;
        e.a = a;
        const double s = 2.0 * std::sqrt(t * (1.0 + a * a));
        e.r_outer = std::log(n) / s;
        e.r_inner = band.inner_valid ? std::log(n * t) / s : 0.0;
        band.entries.push_back(e);
    }
    return band;
}

/// Comparison of exact saddle quantities against their d -> 1 expansions.
/// The quadratic-form limit of r(S(w+ + i beta y) - S(w+)) is measured
/// directly; it converges to -y^2 (1+a^2)^{3/2}/4 (equivalently
/// S'' sqrt(t) -> (1+a^2)^{3/2}/2).
struct SmallTExpansionReport {
    double a = 0, t = 0;
    double w_plus_exact = 0;
    double w_plus_series = 0;      // 1 + 2 a sqrt(t)/sqrt(1+a^2)
    double w_plus_err_over_t = 0;  // -> 2a^2/(1+a^2)
    double S_exact = 0;
    double S_series = 0;           // -2 sqrt((1+a^2) t)
    double S_err_over_sqrt_t = 0;  // -> 0
    double G_ratio = 0;            // G(w+) * 4 sqrt(t) / sqrt(1+a^2) -> 1
    double quad_coeff = 0;         // measured -r(S(w+ + i beta) - S(w+)), y = 1
    double quad_coeff_limit = 0;   // (1+a^2)^{3/2}/4
    double Spp_sqrt_t = 0;         // S'' sqrt(t) -> (1+a^2)^{3/2}/2
};

inline SmallTExpansionReport small_t_saddle_expansions(double a, double t, double r_sqrt_t = 100.0) {
    if (!(t > 0.0 && t <= 1e-2))
        throw std::invalid_argument("small_t_saddle_expansions: requires 0 < t <= 1e-2");
    if (!(r_sqrt_t >= 10.0))
        throw std::invalid_argument("small_t_saddle_expansions: requires r sqrt(t) >= 10");
    const double d = 1.0 + t;
    SaddleData s = saddle(a, d);
    SmallTExpansionReport rep;
    rep.a = a;
    rep.t = t;
    rep.w_plus_exact = s.w_plus;
    rep.w_plus_series = 1.0 + 2.0 * a * std::sqrt(t) / std::sqrt(1.0 + a * a);
    rep.w_plus_err_over_t = std::abs(s.w_plus - rep.w_plus_series) / t;
    rep.S_exact = s.S_cr;
    rep.S_series = -2.0 * std::sqrt((1.0 + a * a) * t);
    rep.S_err_over_sqrt_t = std::abs(s.S_cr - rep.S_series) / std::sqrt(t);
    rep.G_ratio = s.G_cr * 4.0 * std::sqrt(t) / std::sqrt(1.0 + a * a);
    const double r = r_sqrt_t / std::sqrt(t);
    const double beta = std::sqrt(std::sqrt(t) / r);
    std::complex<double> dS =
        spectral_S(std::complex<double>(s.w_plus, beta), d, a) - std::complex<double>(s.S_cr, 0.0);
    rep.quad_coeff = -(r * dS).real();
    rep.quad_coeff_limit = std::pow(1.0 + a * a, 1.5) / 4.0;
    rep.Spp_sqrt_t = s.S_pp * std::sqrt(t);
    return rep;
}

/// Boundary of the gaseous phase of the amoeba of the uniform P(z, w): the
/// closed oval traced by (log z_-(w), log w) and (log z_+(w), log w) for real
/// w between the inner branch points w2, w3.
inline std::vector<std::pair<double, double>> amoeba_gas_boundary(double d, int n_samples) {
    if (n_samples < 2) throw std::invalid_argument("amoeba_gas_boundary: need at least 2 samples");
    auto bp = branch_points(d);
    const double lw2 = std::log(bp[1]), lw3 = std::log(bp[2]);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(2 * static_cast<std::size_t>(n_samples));
    // lower arc: z_- branch, w sweeping w2 -> w3 (log z < 0), then upper arc back
    for (int i = 0; i < n_samples; ++i) {
        double lw = lw2 + (lw3 - lw2) * i / (n_samples - 1);
        double w = std::exp(lw);
        double v = 4.0 * d - w - 1.0 / w;
        double disc = std::max(v * v - 4.0, 0.0);
        double zp = 0.5 * (v + std::sqrt(disc));
        pts.emplace_back(-std::log(zp), lw);
    }
    for (int i = n_samples - 2; i >= 1; --i) {
        double lw = lw2 + (lw3 - lw2) * i / (n_samples - 1);
        double w = std::exp(lw);
        double v = 4.0 * d - w - 1.0 / w;
        double disc = std::max(v * v - 4.0, 0.0);
        double zp = 0.5 * (v + std::sqrt(disc));
        pts.emplace_back(std::log(zp), lw);
    }
    return pts;
}

/// Duality test between the limit shape and the amoeba gas boundary:
/// the numerical dual of -(1/S, a/S) must equal -(log z_+(w+), log w+), and
/// dS/da must equal -log w+ (with Q(a) = -1/S^2 as the tangency normalizer).
/// Derivatives use central differences with one Richardson step.
struct DualCheckReport {
    double sup_point_dist = 0;   // sup_a |numerical dual - (-log z_cr, -log w+)|
    double max_dsda_rel = 0;     // relative error of dS/da vs -log w+
    double max_q_rel = 0;        // relative error of Q vs -1/S^2
    std::vector<double> a_grid;
};

inline DualCheckReport dual_check(double d, const std::vector<double>& a_grid, double h = 1e-5) {
    DualCheckReport rep;
    rep.a_grid = a_grid;
    auto Sof = [&](double a) { return saddle(a, d).S_cr; };
    auto deriv = [&](auto&& f, double a) {
        double d1 = (f(a + h) - f(a - h)) / (2.0 * h);
        double d2 = (f(a + h / 2) - f(a - h / 2)) / h;
        return (4.0 * d2 - d1) / 3.0;  // Richardson once
    };
    for (double a : a_grid) {
        if (!(a > 2 * h && a < 1.0 - 2 * h))
            throw std::invalid_argument("dual_check: a grid must stay inside (0, 1)");
        SaddleData s = saddle(a, d);
        const double S = s.S_cr;
        const double Sa = deriv(Sof, a);
        auto xf = [&](double aa) { return -1.0 / Sof(aa); };
        auto yf = [&](double aa) { return -aa / Sof(aa); };
        const double xp = deriv(xf, a), yp = deriv(yf, a);
        const double x = -1.0 / S, y = -a / S;
        const double Q = y * xp - x * yp;
        const double dual_x = yp / Q, dual_y = -xp / Q;
        const double ref_x = -std::log(s.z_cr), ref_y = -std::log(s.w_plus);
        rep.sup_point_dist =
            std::max(rep.sup_point_dist, std::hypot(dual_x - ref_x, dual_y - ref_y));
        if (s.w_plus > 1.0) {
            double ref = -std::log(s.w_plus);
            rep.max_dsda_rel = std::max(rep.max_dsda_rel, std::abs(Sa - ref) / std::abs(ref));
        }
        rep.max_q_rel = std::max(rep.max_q_rel, std::abs(Q - (-1.0 / (S * S))) / (1.0 / (S * S)));
    }
    return rep;
}

}  // namespace leaky
