#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace diskq {

// Exact coefficient type for the whole symbolic layer.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

inline std::string rational_to_string(const Rational& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

inline Rational rational_from_string(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(Integer(s));
    Integer num(s.substr(0, slash));
    Integer den(s.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("rational with zero denominator: " + s);
    return Rational(num, den);
}

inline Rational factorial(int n) {
    Integer f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return Rational(f);
}

inline Rational binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    Integer num = 1, den = 1;
    for (int i = 0; i < k; ++i) { num *= (n - i); den *= (i + 1); }
    return Rational(num, den);
}

} // namespace diskq
