#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>
#include <string>

namespace gradcert {

/// Exact arbitrary-precision rational; coefficient type of every polynomial.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Parses "p", "-p" or "p/q" with decimal integers p, q (q > 0 after sign fix).
inline Rational parse_rational(const std::string& text) {
    Rational q(text);
    return q;
}

} // namespace gradcert
