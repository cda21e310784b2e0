#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <string>

#include "wow/errors.hpp"

namespace wow {

namespace mp = boost::multiprecision;

/// Exact rational scalar used by the `--mode rational` kernels and by the
/// brute-force oracles. Expression templates are disabled so the type can be
/// used interchangeably with double in generic code (std::min, auto, ...).
using BigInt = mp::number<mp::cpp_int_backend<>, mp::et_off>;
using Rational = mp::number<mp::rational_adaptor<mp::cpp_int_backend<>>, mp::et_off>;

template <class S>
inline constexpr bool is_exact_v = false;
template <>
inline constexpr bool is_exact_v<Rational> = true;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline bool is_finite(double x) { return std::isfinite(x); }
inline bool is_finite(const Rational&) { return true; }

/// Exact value of a finite double (every finite double is a dyadic rational).
inline Rational rational_from_double(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("non-finite value in rational mode");
  return Rational(x);
}

template <class S>
S scalar_from_double(double x);
template <>
inline double scalar_from_double<double>(double x) { return x; }
template <>
inline Rational scalar_from_double<Rational>(double x) { return rational_from_double(x); }

template <class S>
S scalar_from_int(long long n) { return S(n); }

template <class S>
S scalar_from_fraction(long long num, long long den);
template <>
inline double scalar_from_fraction<double>(long long num, long long den) {
  return static_cast<double>(num) / static_cast<double>(den);
}
template <>
inline Rational scalar_from_fraction<Rational>(long long num, long long den) {
  if (den == 0) throw InvalidArgument("zero denominator");
  return Rational(num) / Rational(den);
}

/// base^n by squaring; exact for rational bases.
template <class S>
S ipow(S base, unsigned n) {
  S result(1);
  while (n > 0) {
    if (n & 1u) result *= base;
    base *= base;
    n >>= 1;
  }
  return result;
}

inline bool is_integral_exponent(double p) {
  return std::isfinite(p) && p == std::floor(p) && p >= 0 && p <= 64;
}

/// Parses "a/b", integers, or decimal/scientific literals. Exact in rational
/// mode ("0.1" means 1/10, not the binary double).
template <class S>
S parse_scalar(const std::string& text);

template <>
inline double parse_scalar<double>(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const double num = std::stod(text.substr(0, slash));
      const double den = std::stod(text.substr(slash + 1));
      if (den == 0) throw ParseError("zero denominator: " + text);
      return num / den;
    }
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw ParseError("trailing characters in number: " + text);
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError("not a number: " + text);
  } catch (const std::out_of_range&) {
    throw ParseError("number out of range: " + text);
  }
}

namespace detail {

inline Rational parse_decimal_rational(const std::string& text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }
  BigInt mantissa = 0;
  long long exponent10 = 0;
  bool any_digit = false;
  for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
    mantissa = mantissa * 10 + (text[pos] - '0');
    any_digit = true;
  }
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
      mantissa = mantissa * 10 + (text[pos] - '0');
      --exponent10;
      any_digit = true;
    }
  }
  if (!any_digit) throw ParseError("not a number: " + text);
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_neg = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_neg = text[pos] == '-';
      ++pos;
    }
    if (pos == text.size()) throw ParseError("malformed exponent: " + text);
    long long e = 0;
    for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos])); ++pos) {
      e = e * 10 + (text[pos] - '0');
      if (e > 100000) throw ParseError("exponent out of range: " + text);
    }
    exponent10 += exp_neg ? -e : e;
  }
  if (pos != text.size()) throw ParseError("trailing characters in number: " + text);
  Rational value(mantissa);
  if (exponent10 > 0) value *= Rational(ipow(BigInt(10), static_cast<unsigned>(exponent10)));
  if (exponent10 < 0) value /= Rational(ipow(BigInt(10), static_cast<unsigned>(-exponent10)));
  return negative ? Rational(-value) : value;
}

}  // namespace detail

template <>
inline Rational parse_scalar<Rational>(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const Rational num = detail::parse_decimal_rational(text.substr(0, slash));
    const Rational den = detail::parse_decimal_rational(text.substr(slash + 1));
    if (den == 0) throw ParseError("zero denominator: " + text);
    return num / den;
  }
  return detail::parse_decimal_rational(text);
}

inline std::string rational_to_string(const Rational& x) {
  return numerator(x).str() + "/" + denominator(x).str();
}

/// Numeric tolerances; rational mode runs everything exactly.
template <class S>
struct Tolerances {
  S sum;
  S feas;
  S gap;
};

template <class S>
Tolerances<S> default_tolerances();
template <>
inline Tolerances<double> default_tolerances<double>() { return {1e-9, 1e-9, 1e-8}; }
template <>
inline Tolerances<Rational> default_tolerances<Rational>() {
  return {Rational(0), Rational(0), Rational(0)};
}

}  // namespace wow
