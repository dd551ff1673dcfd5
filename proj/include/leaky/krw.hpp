#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "leaky/grid.hpp"
#include "leaky/logsum.hpp"
#include "leaky/rule.hpp"

namespace leaky {

/// Death-site distribution of the killed random walk, truncated after K steps.
/// Probabilities are stored as natural logs; unreachable sites hold -inf.
/// The truncation is certified: the walk survives past step K with probability
/// (1/d)^K, so sum_x P equals 1 up to tail_bound and each entry is a lower
/// bound within it.
struct DeathProbField {
    Grid<double> logp;
    long steps = 0;         // K
    double tail_bound = 0;  // (1/d)^K
    double d = 0;
    std::array<double, 4> weights{};  // up, right, down, left

    double log_total() const {
        double acc = kLogZero;
        for (double v : logp.cells()) acc = log_add(acc, v);
        return acc;
    }
    /// log sum_k P(j, k) over the vertical line x = j.
    double log_column_sum(int j) const {
        double acc = kLogZero;
        for (int y = -logp.radius(); y <= logp.radius(); ++y) acc = log_add(acc, logp(j, y));
        return acc;
    }
};

inline long dp_steps_for_tail(double d, double tail_eps) {
    if (!(tail_eps > 0)) throw std::invalid_argument("death_prob_dp: tail_eps must be > 0");
    if (!(d > 1.0)) throw std::invalid_argument("death_prob_dp: requires d > 1");
    return static_cast<long>(std::ceil(std::log(1.0 / tail_eps) / std::log(d)));
}

namespace detail {

// One DP step over the rows [y0, y1]; reads cur (step k), writes nxt (step k+1).
inline void dp_step_rows(const Grid<double>& cur, Grid<double>& nxt, int y0, int y1, int reach,
                         const std::array<double, 4>& logw) {
    const int R = cur.radius();
    for (int y = y0; y <= y1; ++y) {
        int span = reach - std::abs(y);
        if (span < 0) continue;
        int x0 = std::max(-R, -span), x1 = std::min(R, span);
        for (int x = x0; x <= x1; ++x) {
            double lu = (y > -R) ? cur(x, y - 1) : kLogZero;   // from south, moving up
            double ld = (y < R) ? cur(x, y + 1) : kLogZero;
            double lr = (x > -R) ? cur(x - 1, y) : kLogZero;   // from west, moving right
            double ll = (x < R) ? cur(x + 1, y) : kLogZero;
            nxt(x, y) = log_add4(logw[0] + lu, logw[1] + lr, logw[2] + ld, logw[3] + ll);
        }
    }
}

}  // namespace detail

/// Dynamic-programming death probabilities: accumulates p_kill times the
/// alive-occupation measure for k = 0..K with K = ceil(log(tail_eps)/log(1/d)).
/// Requires radius >= K so the truncated walk cannot leave the grid.
template <class S>
DeathProbField death_prob_dp(const ToppleRule<S>& rule, int radius, double tail_eps, int threads = 1) {
    const StepDistribution sd = StepDistribution::from_rule(rule);
    const double d = to_double(rule.d);
    const long K = dp_steps_for_tail(d, tail_eps);
    if (radius < K)
        throw std::invalid_argument("death_prob_dp: radius " + std::to_string(radius) +
                                    " < K = " + std::to_string(K) +
                                    "; truncation would not be certified");

    DeathProbField field;
    field.steps = K;
    field.tail_bound = std::pow(1.0 / d, static_cast<double>(K));
    field.d = d;
    field.weights = {to_double(rule.c_up), to_double(rule.c_right), to_double(rule.c_down),
                     to_double(rule.c_left)};

    const std::array<double, 4> logw = {std::log(sd.p_up), std::log(sd.p_right),
                                        std::log(sd.p_down), std::log(sd.p_left)};
    const double log_kill = std::log(sd.p_kill);

    Grid<double> cur(radius, kLogZero), nxt(radius, kLogZero), acc(radius, kLogZero);
    cur(0, 0) = 0.0;

    threads = std::max(1, threads);
    for (long k = 0; k <= K; ++k) {
        const int reach = static_cast<int>(std::min<long>(k, radius));
        for (int y = -reach; y <= reach; ++y) {
            int span = reach - std::abs(y);
            for (int x = -span; x <= span; ++x) {
                double v = cur(x, y);
                if (v != kLogZero) acc(x, y) = log_add(acc(x, y), log_kill + v);
            }
        }
        if (k == K) break;
        const int nreach = static_cast<int>(std::min<long>(k + 1, radius));
        if (threads == 1 || nreach < 64) {
            detail::dp_step_rows(cur, nxt, -nreach, nreach, nreach, logw);
        } else {
            int rows = 2 * nreach + 1;
            int nt = std::min<int>(threads, std::max(1, rows / 32));
            std::vector<std::thread> pool;
            int per = (rows + nt - 1) / nt;
            for (int t = 0; t < nt; ++t) {
                int y0 = -nreach + t * per;
                int y1 = std::min(nreach, y0 + per - 1);
                if (y0 > y1) break;
                pool.emplace_back(detail::dp_step_rows, std::cref(cur), std::ref(nxt), y0, y1, nreach,
                                  std::cref(logw));
            }
            for (auto& th : pool) th.join();
        }
        std::swap(cur, nxt);
    }
    field.logp = std::move(acc);
    return field;
}

/// Closed-form death probability of the 2-directional (north-east) walk:
/// P_d(i, j) = ((d-1)/d) * binom(i+j, i) * (2d)^{-(i+j)}, zero off the
/// first quadrant.
inline double death_prob_ne_log(long i, long j, double d) {
    if (!(d > 1.0)) throw std::invalid_argument("death_prob_ne: requires d > 1");
    if (i < 0 || j < 0) return kLogZero;
    const long n = i + j;
    double lbinom;
    if (n <= 300) {
        // exact multiplicative evaluation keeps the relative error near eps
        double b = 1.0;
        long kk = std::min(i, j);
        for (long t = 1; t <= kk; ++t) b *= static_cast<double>(n - kk + t) / static_cast<double>(t);
        lbinom = std::log(b);
    } else {
        lbinom = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                 std::lgamma(static_cast<double>(j) + 1.0);
    }
    return std::log((d - 1.0) / d) + lbinom - static_cast<double>(n) * std::log(2.0 * d);
}

inline double death_prob_ne(long i, long j, double d) {
    double l = death_prob_ne_log(i, j, d);
    return l == kLogZero ? 0.0 : std::exp(l);
}

/// Roots z_-(w), z_+(w) of z P(z, w) = 0 for the uniform spectral polynomial:
/// z^2 - (4d - w - 1/w) z + 1 = 0, ordered |z_-| <= 1 <= |z_+|.
inline std::pair<std::complex<double>, std::complex<double>> z_roots(std::complex<double> w, double d) {
    if (w == std::complex<double>(0.0, 0.0)) throw std::invalid_argument("z_roots: w must be nonzero");
    if (!(d > 1.0)) throw std::invalid_argument("z_roots: requires d > 1");
    const std::complex<double> v = 4.0 * d - w - 1.0 / w;
    std::complex<double> s = std::sqrt(v * v - 4.0);
    if ((conj(v) * s).real() < 0.0) s = -s;  // align so v + s is the large root
    const std::complex<double> zp = 0.5 * (v + s);
    const std::complex<double> zm = 2.0 / (v + s);  // cancellation-free small root
    return {zm, zp};
}

inline double z_plus_real(double w, double d) {
    double v = 4.0 * d - w - 1.0 / w;
    return 0.5 * (v + std::sqrt(v * v - 4.0));
}

/// Laurent coefficient [z^j] P^{-1}(z, w) for the uniform rule (c = 4):
/// c(d-1) z_+^{-|j|} / (z_+ - 1/z_+).
inline std::complex<double> coeff_z(long j, std::complex<double> w, double d) {
    auto [zm, zp] = z_roots(w, d);
    std::complex<double> denom = zp - zm;
    if (std::abs(denom) < 1e-14)
        throw std::domain_error("coeff_z: w at a branch point (z_+ = 1/z_+)");
    return 4.0 * (d - 1.0) * std::pow(zp, static_cast<double>(-std::labs(j))) / denom;
}

/// Probability that the uniform walk dies on the vertical line x = j:
/// c(d-1) z_+(1)^{1-|j|} / (z_+(1)^2 - 1).
inline double line_death_prob_log(long j, double d) {
    if (!(d > 1.0)) throw std::invalid_argument("line_death_prob: requires d > 1");
    const double zp = 2.0 * d - 1.0 + std::sqrt((2.0 * d - 1.0) * (2.0 * d - 1.0) - 1.0);
    return std::log(4.0 * (d - 1.0)) + (1.0 - static_cast<double>(std::labs(j))) * std::log(zp) -
           std::log(zp * zp - 1.0);
}

inline double line_death_prob(long j, double d) { return std::exp(line_death_prob_log(j, d)); }

}  // namespace leaky
