#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bdc {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Scalar backends: exact rationals or IEEE doubles. Everything numeric in the
// library is written against this pair of types.
template <class S>
concept Scalar = std::same_as<S, Rational> || std::same_as<S, double>;

inline double to_double(const Rational& v) { return v.convert_to<double>(); }

template <Scalar S>
S scalar_cast(const Rational& v) {
    if constexpr (std::same_as<S, Rational>) {
        return v;
    } else {
        return to_double(v);
    }
}

// Parses "a/b" or a plain integer string.
inline Rational parse_rational(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            return Rational(BigInt(text));
        }
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw std::invalid_argument("malformed rational literal: \"" + text + "\"");
    }
}

inline std::string format_rational(const Rational& v) {
    const BigInt num = boost::multiprecision::numerator(v);
    const BigInt den = boost::multiprecision::denominator(v);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

// Smallest-denominator rational within a few ulps of x, found by walking the
// continued-fraction convergents. Falls back to the exact dyadic value of the
// double when no denominator below the bound fits. Used when a spec document
// writes a probability as a JSON number: 0.6666666666666666 means 2/3.
inline Rational snap_to_rational(double x, std::int64_t max_denominator = 1'000'000'000) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite number in spec document");
    const double tol = 4.0 * std::abs(x) * std::numeric_limits<double>::epsilon();
    BigInt h2 = 0, k2 = 1;  // convergent n-2
    BigInt h1 = 1, k1 = 0;  // convergent n-1
    double value = x;
    for (int iter = 0; iter < 64; ++iter) {
        const double floor_part = std::floor(value);
        const BigInt a(static_cast<long long>(floor_part));
        const BigInt h = a * h1 + h2;
        const BigInt k = a * k1 + k2;
        if (k > max_denominator) break;
        h2 = h1; k2 = k1;
        h1 = h; k1 = k;
        const Rational approx(h, k);
        if (std::abs(to_double(approx) - x) <= tol) return approx;
        const double frac = value - floor_part;
        if (frac < 1e-18) break;
        value = 1.0 / frac;
    }
    return Rational(x);  // exact dyadic fallback
}

}  // namespace bdc
