#pragma once

#include <mpfr.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include "leaky/krw.hpp"

namespace leaky {

/// Result of the contour-integral evaluation of log P_d(r, a r).
struct ContourResult {
    double log_p = 0;
    long points = 0;          // quadrature nodes actually used
    long precision_bits = 0;  // working precision of the final pass
    double imag_rel = 0;      // |imaginary part| / real part, should vanish
    bool converged = false;
};

namespace detail {

struct MpfrReal {
    mpfr_t v;
    explicit MpfrReal(mpfr_prec_t p) { mpfr_init2(v, p); }
    ~MpfrReal() { mpfr_clear(v); }
    MpfrReal(const MpfrReal&) = delete;
    MpfrReal& operator=(const MpfrReal&) = delete;
};

struct ContourSums {
    double log_abs_re = 0;  // log |sum_re|
    int sign_re = 0;
    double imag_rel = 0;
    bool resolved = false;  // sum stands clear of the rounding-noise floor
};

// Trapezoid sum of z_+(w)^-r e^{-i m theta} / sqrt(v^2-4) over |w| = 1 with N
// uniform nodes at precision prec. The integrand peak is at theta = 0; the
// sum cancels down by up to e^{r(|S(a)| - log z_+(1))}, so `resolved` reports
// whether prec left at least ~40 clean bits in the result.
inline ContourSums contour_pass(long r, long m, double d, long N, mpfr_prec_t prec) {
    const mpfr_rnd_t R = MPFR_RNDN;
    MpfrReal pi2(prec), th(prec), co(prec), v(prec), q(prec), z(prec), zr(prec), ang(prec),
        tco(prec), tsi(prec), term(prec), sum_re(prec), sum_im(prec), tmp(prec);
    mpfr_const_pi(pi2.v, R);
    mpfr_mul_ui(pi2.v, pi2.v, 2, R);
    mpfr_set_zero(sum_re.v, 1);
    mpfr_set_zero(sum_im.v, 1);

    for (long i = 0; i < N; ++i) {
        mpfr_mul_si(th.v, pi2.v, i, R);
        mpfr_div_si(th.v, th.v, N, R);
        mpfr_cos(co.v, th.v, R);
        mpfr_mul_si(tmp.v, co.v, -2, R);
        mpfr_add_d(v.v, tmp.v, 4.0 * d, R);  // v = 4d - 2 cos(theta)
        mpfr_mul(q.v, v.v, v.v, R);
        mpfr_sub_ui(q.v, q.v, 4, R);
        mpfr_sqrt(q.v, q.v, R);             // sqrt(v^2 - 4), positive on |w| = 1
        mpfr_add(z.v, v.v, q.v, R);
        mpfr_div_ui(z.v, z.v, 2, R);        // z_+
        mpfr_pow_si(zr.v, z.v, -r, R);      // z_+^{-r}
        mpfr_div(zr.v, zr.v, q.v, R);
        mpfr_mul_si(ang.v, th.v, m, R);
        mpfr_cos(tco.v, ang.v, R);
        mpfr_sin(tsi.v, ang.v, R);
        mpfr_mul(term.v, zr.v, tco.v, R);
        mpfr_add(sum_re.v, sum_re.v, term.v, R);
        mpfr_mul(term.v, zr.v, tsi.v, R);
        mpfr_sub(sum_im.v, sum_im.v, term.v, R);
    }

    ContourSums out;
    out.sign_re = mpfr_sgn(sum_re.v);
    if (out.sign_re != 0) {
        mpfr_abs(tmp.v, sum_re.v, R);
        mpfr_log(tmp.v, tmp.v, R);
        out.log_abs_re = mpfr_get_d(tmp.v, R);
        mpfr_abs(tmp.v, sum_im.v, R);
        mpfr_log(tmp.v, tmp.v, R);
        double log_abs_im = mpfr_get_d(tmp.v, R);
        out.imag_rel = std::exp(log_abs_im - out.log_abs_re);
    }
    // peak term magnitude, in natural log (double precision is plenty here)
    const double v0 = 4.0 * d - 2.0;
    const double q0 = std::sqrt(v0 * v0 - 4.0);
    const double log_peak = -static_cast<double>(r) * std::log((v0 + q0) / 2.0) - std::log(q0);
    const double log_noise = log_peak + std::log(static_cast<double>(N)) -
                             static_cast<double>(prec) * std::log(2.0);
    out.resolved = out.sign_re > 0 && (out.log_abs_re - log_noise) > 40.0 * std::log(2.0);
    return out;
}

inline ContourSums contour_pass_stable(long r, long m, double d, long N, long& prec_used) {
    mpfr_prec_t prec = static_cast<mpfr_prec_t>(std::max<long>(prec_used, 128));
    for (int tries = 0; tries < 12; ++tries) {
        ContourSums s = contour_pass(r, m, d, N, prec);
        if (s.resolved) {
            prec_used = static_cast<long>(prec);
            return s;
        }
        prec = prec * 2;
        if (prec > (1 << 17))
            throw std::runtime_error("death_prob_contour: precision escalation failed");
    }
    throw std::runtime_error("death_prob_contour: quadrature sum never resolved");
}

}  // namespace detail

/// log P_d(r, a r) for the uniform rule by trapezoid quadrature of the
/// contour representation over |w| = 1 (spectrally accurate for this periodic
/// analytic integrand). With quad_points = 0 the node count doubles until the
/// value is stable; an explicit quad_points is validated by one doubling and
/// rejected if the value still moves by more than 1e-10 relative.
inline ContourResult death_prob_contour(long r, double a, double d, long quad_points = 0) {
    if (!(d > 1.0)) throw std::invalid_argument("death_prob_contour: requires d > 1");
    if (r < 0) throw std::invalid_argument("death_prob_contour: requires r >= 0");
    if (a < 0.0 || a > 1.0) throw std::invalid_argument("death_prob_contour: requires 0 <= a <= 1");
    const double ar = a * static_cast<double>(r);
    const long m = std::lround(ar);
    if (std::fabs(ar - static_cast<double>(m)) > 1e-9)
        throw std::invalid_argument("death_prob_contour: a*r must be an integer, got " +
                                    std::to_string(ar));

    const double log_const = std::log(4.0 * (d - 1.0));
    long prec = 128;
    detail::ContourSums last{};
    auto value_at = [&](long N) {
        last = detail::contour_pass_stable(r, m, d, N, prec);
        return log_const + last.log_abs_re - std::log(static_cast<double>(N));
    };

    ContourResult res;
    if (quad_points > 0) {
        double v1 = value_at(quad_points);
        double v2 = value_at(2 * quad_points);
        if (std::fabs(v1 - v2) > 1e-10)
            throw std::invalid_argument(
                "death_prob_contour: quad_points too small; doubling the nodes moved the result by " +
                std::to_string(std::fabs(v1 - v2)) + " in log");
        res.log_p = v2;
        res.points = 2 * quad_points;
        res.converged = true;
    } else {
        long N = 256;
        while (N < 2 * (r + m + 1)) N *= 2;
        double prev = value_at(N);
        for (;;) {
            N *= 2;
            if (N > (1 << 22)) throw std::runtime_error("death_prob_contour: no convergence in N");
            double curv = value_at(N);
            if (std::fabs(curv - prev) <= 1e-12) {
                res.log_p = curv;
                res.points = N;
                res.converged = true;
                break;
            }
            prev = curv;
        }
    }
    res.imag_rel = last.imag_rel;
    res.precision_bits = prec;
    return res;
}

}  // namespace leaky
