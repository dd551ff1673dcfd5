#pragma once

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace leaky {

using Rational = mpq_class;
using BigInt = mpz_class;

enum class ScalarMode { Float64, ExactRational };

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }
inline double to_double(const BigInt& x) { return x.get_d(); }

inline bool is_finite_scalar(double x) { return std::isfinite(x); }
inline bool is_finite_scalar(const Rational&) { return true; }

inline bool is_negative(double x) { return x < 0; }
inline bool is_negative(const Rational& x) { return sgn(x) < 0; }

/// floor(a / b) for b > 0, as a scalar of the same type.
inline double floor_quotient(double a, double b) { return std::floor(a / b); }
inline Rational floor_quotient(const Rational& a, const Rational& b) {
    Rational q = a / b;
    BigInt r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Rational(r);
}

inline Rational ceil_rational(const Rational& q) {
    BigInt r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return Rational(r);
}

inline bool is_integer(const Rational& q) { return q.get_den() == 1; }

/// Parses a chip count in plain or mantissa-e-exponent form ("123", "2.5e3",
/// "1e100") into an exact rational.
inline Rational parse_rational(const std::string& text) {
    const char* s = text.c_str();
    std::size_t i = 0, n = text.size();
    bool neg = false;
    if (i < n && (s[i] == '+' || s[i] == '-')) neg = (s[i++] == '-');
    std::string digits;
    long frac_digits = 0;
    bool any = false;
    while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) {
        digits += s[i++];
        any = true;
    }
    if (i < n && s[i] == '.') {
        ++i;
        while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) {
            digits += s[i++];
            ++frac_digits;
            any = true;
        }
    }
    long expo = 0;
    if (i < n && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < n && (s[i] == '+' || s[i] == '-')) eneg = (s[i++] == '-');
        if (i >= n) throw std::invalid_argument("parse_rational: empty exponent in '" + text + "'");
        long e = 0;
        while (i < n && std::isdigit(static_cast<unsigned char>(s[i]))) {
            e = e * 10 + (s[i++] - '0');
            if (e > 1000000) throw std::invalid_argument("parse_rational: exponent too large");
        }
        expo = eneg ? -e : e;
    }
    if (!any || i != n)
        throw std::invalid_argument("parse_rational: cannot parse '" + text + "'");

    BigInt mant(digits.empty() ? "0" : digits);
    if (neg) mant = -mant;
    long net = expo - frac_digits;
    BigInt pow10;
    mpz_ui_pow_ui(pow10.get_mpz_t(), 10, static_cast<unsigned long>(net < 0 ? -net : net));
    Rational q;
    if (net >= 0)
        q = Rational(mant * pow10);
    else {
        q = Rational(mant, pow10);
        q.canonicalize();
    }
    return q;
}

/// Exact decimal string when the denominator is 1, otherwise "num/den".
inline std::string rational_to_string(const Rational& q) {
    if (q.get_den() == 1) return q.get_num().get_str();
    return q.get_num().get_str() + "/" + q.get_den().get_str();
}

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr ScalarMode mode = ScalarMode::Float64;
    static const char* name() { return "float"; }
    static double from_string(const std::string& s) {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("cannot parse float '" + s + "'");
        return v;
    }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr ScalarMode mode = ScalarMode::ExactRational;
    static const char* name() { return "rational"; }
    static Rational from_string(const std::string& s) { return parse_rational(s); }
};

/// Compensated (Kahan) accumulator; exact rationals need no compensation.
struct KahanSum {
    double sum = 0.0;
    double carry = 0.0;
    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline void accumulate(KahanSum& acc, double v) { acc.add(v); }
inline void accumulate(Rational& acc, const Rational& v) { acc += v; }

}  // namespace leaky
