#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace leaky {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

/// log(exp(a) + exp(b)) without leaving the log domain.
inline double log_add(double a, double b) {
    if (a == kLogZero) return b;
    if (b == kLogZero) return a;
    if (a < b) {
        double t = a;
        a = b;
        b = t;
    }
    return a + std::log1p(std::exp(b - a));
}

inline double log_add4(double a, double b, double c, double d) {
    double m = a;
    if (b > m) m = b;
    if (c > m) m = c;
    if (d > m) m = d;
    if (m == kLogZero) return kLogZero;
    double s = 0.0;
    if (a != kLogZero) s += std::exp(a - m);
    if (b != kLogZero) s += std::exp(b - m);
    if (c != kLogZero) s += std::exp(c - m);
    if (d != kLogZero) s += std::exp(d - m);
    return m + std::log(s);
}

/// Sequential reduction in a fixed order so results are reproducible.
inline double log_sum(const std::vector<double>& vals) {
    double acc = kLogZero;
    for (double v : vals) acc = log_add(acc, v);
    return acc;
}

}  // namespace leaky
