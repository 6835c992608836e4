#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wachlab {

using BigInt = boost::multiprecision::cpp_int;

// Base error type; CLI maps input_error -> exit 1 and math_error -> exit 2.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct input_error : error {
    using error::error;
};
// Typed mathematical failure (precision exhausted, non-separable roots, ...).
struct math_error : error {
    using error::error;
};
struct precision_error : math_error {
    using math_error::math_error;
};
struct nonseparable_error : math_error {
    using math_error::math_error;
};

inline BigInt pow_big(const BigInt& base, long long e) {
    if (e < 0) throw input_error("pow_big: negative exponent");
    BigInt r = 1, b = base;
    long long k = e;
    while (k > 0) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

inline BigInt mod_reduce(const BigInt& x, const BigInt& m) {
    BigInt r = x % m;
    if (r < 0) r += m;
    return r;
}

// ord_p of a residue known mod p^cap; returns cap when x == 0 (meaning ">= cap").
inline int ord_p_residue(BigInt x, long long p, int cap) {
    if (x == 0) return cap;
    int v = 0;
    while (v < cap && x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

// Exact division by p^k of a residue mod p^cap; throws if not divisible.
inline BigInt exact_div_pk(const BigInt& x, long long p, int k, const char* what) {
    BigInt pk = pow_big(p, k);
    if (x % pk != 0) throw math_error(std::string("exact division by p^k failed in ") + what);
    return x / pk;
}

// Exact rational with small components; slopes of polygons, t-invariants.
struct Rat {
    long long num = 0;
    long long den = 1;

    Rat() = default;
    Rat(long long n) : num(n), den(1) {}
    Rat(long long n, long long d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw error("Rat: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend Rat operator+(Rat a, Rat b) { return Rat(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rat operator-(Rat a, Rat b) { return Rat(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend Rat operator*(Rat a, Rat b) { return Rat(a.num * b.num, a.den * b.den); }
    friend Rat operator/(Rat a, Rat b) { return Rat(a.num * b.den, a.den * b.num); }
    friend bool operator==(const Rat& a, const Rat& b) { return a.num == b.num && a.den == b.den; }
    friend bool operator!=(const Rat& a, const Rat& b) { return !(a == b); }
    friend bool operator<(const Rat& a, const Rat& b) { return a.num * b.den < b.num * a.den; }
    friend bool operator<=(const Rat& a, const Rat& b) { return a.num * b.den <= b.num * a.den; }
    friend bool operator>(const Rat& a, const Rat& b) { return b < a; }
    friend bool operator>=(const Rat& a, const Rat& b) { return b <= a; }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
};

}  // namespace wachlab
