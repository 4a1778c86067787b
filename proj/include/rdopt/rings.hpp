#pragma once

// Scalar domains for the polynomial and standard instances: arbitrary-precision
// integers and rationals (GMP-backed) plus 64-bit floats, under a single trait
// vocabulary for parsing, printing, comparison, and exactness. Rationals are
// kept in canonical reduced form (lowest terms, positive denominator).

#include <gmpxx.h>

#include <cmath>
#include <compare>
#include <concepts>
#include <cstdio>
#include <string>

#include "rdopt/errors.hpp"

namespace rdopt {

using Int = mpz_class;
using Rat = mpq_class;

namespace detail {

inline Int pow10_int(unsigned long k) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// parsing

inline Int parse_int(const std::string& s) {
    if (s.empty()) throw parse_error("empty integer text");
    try {
        return Int(s, 10);
    } catch (const std::invalid_argument&) {
        throw parse_error("bad integer text: '" + s + "'");
    }
}

// Accepts "p/q", plain integers, and exact decimal/scientific forms
// ("0.6" -> 3/5, "1.5e-3" -> 3/2000).
inline Rat parse_rat(const std::string& s) {
    if (s.empty()) throw parse_error("empty rational text");
    if (auto slash = s.find('/'); slash != std::string::npos) {
        Int num = parse_int(s.substr(0, slash));
        Int den = parse_int(s.substr(slash + 1));
        if (den == 0) throw parse_error("zero denominator: '" + s + "'");
        Rat q(num, den);
        q.canonicalize();
        return q;
    }
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        neg = s[i] == '-';
        ++i;
    }
    std::string digits;
    long frac_len = 0;
    bool any = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        digits += s[i++];
        any = true;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            digits += s[i++];
            ++frac_len;
            any = true;
        }
    }
    long exp10 = 0;
    if (any && i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        bool eneg = false;
        if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
            eneg = s[i] == '-';
            ++i;
        }
        bool edig = false;
        long e = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            e = e * 10 + (s[i++] - '0');
            edig = true;
            if (e > 1000000) throw parse_error("exponent out of range: '" + s + "'");
        }
        if (!edig) throw parse_error("bad exponent: '" + s + "'");
        exp10 = eneg ? -e : e;
    }
    if (!any || i != s.size()) throw parse_error("bad rational text: '" + s + "'");
    Int num(digits.empty() ? std::string("0") : digits);
    if (neg) num = -num;
    long shift = exp10 - frac_len;
    Rat q;
    if (shift >= 0)
        q = Rat(num * detail::pow10_int(static_cast<unsigned long>(shift)));
    else
        q = Rat(num, detail::pow10_int(static_cast<unsigned long>(-shift)));
    q.canonicalize();
    return q;
}

inline double parse_f64(const std::string& s) {
    if (s.empty()) throw parse_error("empty float text");
    const char* b = s.c_str();
    char* e = nullptr;
    double v = std::strtod(b, &e);
    if (e != b + s.size()) throw parse_error("bad float text: '" + s + "'");
    if (!std::isfinite(v)) throw invalid_element("non-finite float: '" + s + "'");
    return v;
}

// ---------------------------------------------------------------------------
// printing

inline std::string ring_str(const Int& v) { return v.get_str(); }

inline std::string ring_str(const Rat& v) {
    if (v.get_den() == 1) return v.get_num().get_str();
    return v.get_num().get_str() + "/" + v.get_den().get_str();
}

inline std::string ring_str(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// comparison

inline std::strong_ordering ring_cmp(const Int& a, const Int& b) {
    int c = cmp(a, b);
    return c < 0 ? std::strong_ordering::less
         : c > 0 ? std::strong_ordering::greater
                 : std::strong_ordering::equal;
}

inline std::strong_ordering ring_cmp(const Rat& a, const Rat& b) {
    int c = cmp(a, b);
    return c < 0 ? std::strong_ordering::less
         : c > 0 ? std::strong_ordering::greater
                 : std::strong_ordering::equal;
}

inline std::strong_ordering ring_cmp(double a, double b) {
    if (std::isnan(a) || std::isnan(b)) throw invalid_element("NaN has no order");
    return a < b ? std::strong_ordering::less
         : a > b ? std::strong_ordering::greater
                 : std::strong_ordering::equal;
}

// ---------------------------------------------------------------------------
// traits

template <class R>
struct ring_traits;

template <>
struct ring_traits<Int> {
    static constexpr const char* name = "int";
    static constexpr bool exact = true;
    static Int parse(const std::string& s) { return parse_int(s); }
    static std::string str(const Int& v) { return ring_str(v); }
    static Int from_long(long v) { return Int(v); }
    static double to_double(const Int& v) { return v.get_d(); }
};

template <>
struct ring_traits<Rat> {
    static constexpr const char* name = "rat";
    static constexpr bool exact = true;
    static Rat parse(const std::string& s) { return parse_rat(s); }
    static std::string str(const Rat& v) { return ring_str(v); }
    static Rat from_long(long v) { return Rat(v); }
    static double to_double(const Rat& v) { return v.get_d(); }
};

template <>
struct ring_traits<double> {
    static constexpr const char* name = "float";
    static constexpr bool exact = false;
    static double parse(const std::string& s) { return parse_f64(s); }
    static std::string str(double v) { return ring_str(v); }
    static double from_long(long v) { return static_cast<double>(v); }
    static double to_double(double v) { return v; }
};

template <class R>
concept Ring = requires(R a, R b) {
    { R(0) };
    { R(1) };
    { a == b } -> std::convertible_to<bool>;
    ring_traits<R>::exact;
    { ring_traits<R>::str(a) } -> std::convertible_to<std::string>;
};

template <Ring R>
R ring_pow(const R& base, unsigned k) {
    R acc(1);
    R b = base;
    while (k) {
        if (k & 1u) acc = R(acc * b);
        b = R(b * b);
        k >>= 1u;
    }
    return acc;
}

template <Ring R>
R ring_factorial(unsigned k) {
    R acc(1);
    for (unsigned i = 2; i <= k; ++i) acc = R(acc * ring_traits<R>::from_long(static_cast<long>(i)));
    return acc;
}

} // namespace rdopt
