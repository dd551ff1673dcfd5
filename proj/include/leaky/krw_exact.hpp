#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "leaky/grid.hpp"
#include "leaky/rational.hpp"
#include "leaky/rule.hpp"

namespace leaky {

/// Exact truncated death probabilities. The k-step alive occupation has the
/// common denominator M^k with M = c * num(d); its integer numerators follow a
/// Pascal-style recurrence, so the whole DP runs in integer arithmetic and the
/// truncated field is exact. Off the origin, T applied to the truncated field
/// equals p_kill * q_{K+1} pointwise, which is what the tail bound certifies.
struct ExactDeathProbField {
    Grid<Rational> p;
    long steps = 0;  // K
    Rational tail;   // (1/d)^K
    ToppleRule<Rational> rule;
};

inline ExactDeathProbField death_prob_dp_exact(const ToppleRule<Rational>& rule, int radius, long K) {
    if (!(rule.d > 1)) throw std::invalid_argument("death_prob_dp_exact: requires d > 1");
    if (radius < K) throw std::invalid_argument("death_prob_dp_exact: radius must be >= K");

    // scale weights and d to integers; step probabilities are scale-invariant
    BigInt wden = rule.c_up.get_den();
    for (const Rational* w : {&rule.c_right, &rule.c_down, &rule.c_left}) {
        BigInt g;
        mpz_lcm(g.get_mpz_t(), wden.get_mpz_t(), w->get_den().get_mpz_t());
        wden = g;
    }
    const BigInt wu = rule.c_up.get_num() * (wden / rule.c_up.get_den());
    const BigInt wr = rule.c_right.get_num() * (wden / rule.c_right.get_den());
    const BigInt wd = rule.c_down.get_num() * (wden / rule.c_down.get_den());
    const BigInt wl = rule.c_left.get_num() * (wden / rule.c_left.get_den());
    const BigInt c_int = wu + wr + wd + wl;
    const BigInt dp = rule.d.get_num(), dq = rule.d.get_den();

    const BigInt M = c_int * dp;           // per-step denominator
    const BigInt mu = wu * dq, mr = wr * dq, md = wd * dq, ml = wl * dq;

    Grid<BigInt> cur(radius, BigInt(0)), nxt(radius, BigInt(0)), acc(radius, BigInt(0));
    cur(0, 0) = 1;
    const int R = radius;
    for (long k = 0; k <= K; ++k) {
        // Horner: acc_k = sum_{j<=k} num_j M^{k-j}. The reach diamonds are
        // nested, so every cell with a nonzero acc lies inside the current one.
        const int reach = static_cast<int>(std::min<long>(k, R));
        for (int y = -reach; y <= reach; ++y) {
            int span = reach - std::abs(y);
            for (int x = -span; x <= span; ++x) {
                BigInt& a = acc(x, y);
                a *= M;
                a += cur(x, y);
            }
        }
        if (k == K) break;
        const int nreach = static_cast<int>(std::min<long>(k + 1, R));
        for (int y = -nreach; y <= nreach; ++y) {
            int span = nreach - std::abs(y);
            for (int x = -span; x <= span; ++x) {
                BigInt v(0);
                if (y > -R) v += mu * cur(x, y - 1);
                if (y < R) v += md * cur(x, y + 1);
                if (x > -R) v += mr * cur(x - 1, y);
                if (x < R) v += ml * cur(x + 1, y);
                nxt(x, y) = v;
            }
        }
        std::swap(cur, nxt);
    }

    // P(x) = p_kill * acc(x) / M^K with p_kill = (dp - dq)/dp
    BigInt MK;
    mpz_pow_ui(MK.get_mpz_t(), M.get_mpz_t(), static_cast<unsigned long>(K));
    ExactDeathProbField field;
    field.steps = K;
    field.rule = rule;
    {
        BigInt tn, td;
        mpz_pow_ui(tn.get_mpz_t(), dq.get_mpz_t(), static_cast<unsigned long>(K));
        mpz_pow_ui(td.get_mpz_t(), dp.get_mpz_t(), static_cast<unsigned long>(K));
        field.tail = Rational(tn, td);
        field.tail.canonicalize();
    }
    field.p = Grid<Rational>(radius, Rational(0));
    const BigInt pk_num = dp - dq;
    const BigInt den = dp * MK;
    for (std::size_t i = 0; i < acc.size(); ++i) {
        if (acc[i] == 0) continue;
        Rational v(pk_num * acc[i], den);
        v.canonicalize();
        field.p[i] = v;
    }
    return field;
}

}  // namespace leaky
