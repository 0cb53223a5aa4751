#include "switchwalk/scalar.hpp"

#include "switchwalk/errors.hpp"

#include <cctype>
#include <cmath>
#include <string>

namespace switchwalk {

Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw PreconditionError("rational_from_double: non-finite value");
    if (x == 0.0) return Rational(0);
    int exponent = 0;
    const double mantissa = std::frexp(x, &exponent);
    // mantissa * 2^53 is an exact integer
    const auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
    Rational r(scaled);
    exponent -= 53;
    BigInt pow2 = BigInt(1) << std::abs(exponent);
    if (exponent >= 0) r *= Rational(pow2);
    else r /= Rational(pow2);
    return r;
}

namespace {

BigInt parse_integer(std::string_view s) {
    if (s.empty()) throw ValidationError("empty number");
    BigInt v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) throw ValidationError("not a number: " + std::string(s));
        v = v * 10 + (c - '0');
    }
    return v;
}

Rational parse_decimal(std::string_view s) {
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    long exponent = 0;
    if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        std::string_view exp_part = s.substr(e + 1);
        bool exp_negative = false;
        if (!exp_part.empty() && (exp_part.front() == '-' || exp_part.front() == '+')) {
            exp_negative = exp_part.front() == '-';
            exp_part.remove_prefix(1);
        }
        const BigInt ev = parse_integer(exp_part);
        if (ev > 4000) throw ValidationError("exponent out of range");
        exponent = ev.convert_to<long>();
        if (exp_negative) exponent = -exponent;
        s = s.substr(0, e);
    }
    std::string digits;
    if (const auto dot = s.find('.'); dot != std::string_view::npos) {
        digits = std::string(s.substr(0, dot)) + std::string(s.substr(dot + 1));
        exponent -= static_cast<long>(s.size() - dot - 1);
    } else {
        digits = std::string(s);
    }
    if (digits.empty()) throw ValidationError("not a number");
    Rational r(parse_integer(digits));
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(std::labs(exponent)));
    if (exponent >= 0) r *= Rational(scale);
    else r /= Rational(scale);
    return negative ? Rational(-r) : r;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    text = trim(text);
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
        const Rational num = parse_decimal(trim(text.substr(0, slash)));
        const Rational den = parse_decimal(trim(text.substr(slash + 1)));
        if (den == 0) throw ValidationError("zero denominator in " + std::string(text));
        return num / den;
    }
    return parse_decimal(text);
}

std::string format_rational(const Rational& r) {
    const BigInt num = boost::multiprecision::numerator(r);
    const BigInt den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

}  // namespace switchwalk
