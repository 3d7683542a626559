#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace mg1 {

/// Exact rational angle in units of full turns, normalized into [0, 1).
///
/// Angles of roots of unity are kept as fractions so that membership tests
/// (is this angle a multiple of 1/tau?) and gcd/lcm arithmetic are exact,
/// with conversion to complex numbers deferred to the last moment.
struct Frac {
    std::int64_t num = 0; // numerator, 0 <= num < den after normalization
    std::int64_t den = 1; // denominator, > 0

    Frac() = default;
    Frac(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw std::invalid_argument("Frac: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        num %= den;
        if (num < 0) num += den;
        const std::int64_t g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        if (num == 0) den = 1;
    }

    bool operator==(const Frac& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Frac& o) const { return !(*this == o); }
    bool operator<(const Frac& o) const { return num * o.den < o.num * den; }

    Frac operator+(const Frac& o) const { return Frac(num * o.den + o.num * den, den * o.den); }
    Frac operator-(const Frac& o) const { return Frac(num * o.den - o.num * den, den * o.den); }

    /// Angle scaled by an integer (k-th power of the unit root).
    Frac times(std::int64_t k) const { return Frac(num * k, den); }

    /// Complex-conjugate angle (negation mod 1).
    Frac conj() const { return Frac(-num, den); }

    double turns() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// exp(2*pi*i*f), computed from the reduced fraction (no phase drift under powers).
inline std::complex<double> unit_root(const Frac& f) {
    if (f.num == 0) return {1.0, 0.0};
    if (2 * f.num == f.den) return {-1.0, 0.0};
    const double a = 2.0 * 3.14159265358979323846 * f.turns();
    return {std::cos(a), std::sin(a)};
}

/// exp(2*pi*i*k/n) with the angle reduced exactly first.
inline std::complex<double> unit_root(std::int64_t k, std::int64_t n) {
    return unit_root(Frac(k, n));
}

} // namespace mg1
