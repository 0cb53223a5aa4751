#pragma once

// Numeric backends shared by every module.
//
// Two scalar types are supported behind the same templated interfaces:
//   Rational  exact arbitrary-precision rationals (golden values, small solves)
//   double    IEEE binary64 (large windows, Monte Carlo, irrational ladder laws)

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace switchwalk {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class Backend { exact, float64 };

inline const char* to_string(Backend b) {
    return b == Backend::exact ? "exact" : "float64";
}

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr Backend backend = Backend::float64;
    static constexpr bool is_exact = false;
};

template <>
struct ScalarTraits<Rational> {
    static constexpr Backend backend = Backend::exact;
    static constexpr bool is_exact = true;
};

template <class T>
concept Scalar = requires { ScalarTraits<T>::backend; };

// Exact conversion of a finite double into a rational.
Rational rational_from_double(double x);

// Parses "p/q", integers, and plain decimals ("0.25", "-1.5e-3") exactly.
Rational parse_rational(std::string_view text);

std::string format_rational(const Rational& r);

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

template <Scalar T>
T from_rational(const Rational& r) {
    if constexpr (std::is_same_v<T, Rational>) {
        return r;
    } else {
        return to_double(r);
    }
}

template <Scalar T>
T from_int(std::int64_t k) {
    return T(k);
}

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline bool is_zero(double x) { return x == 0.0; }
inline bool is_zero(const Rational& x) { return x == 0; }

}  // namespace switchwalk
