#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "wow/errors.hpp"
#include "wow/point.hpp"
#include "wow/scalar.hpp"

namespace wow {

template <class S>
using Matrix = std::vector<std::vector<S>>;

enum class Norm { euclidean, ell_q, ell_1, ell_inf };

/// Ground cost c(x,y) = ||x - y||^p for a norm family and exponent p >= 1.
struct CostSpec {
  double p = 2.0;
  Norm norm = Norm::euclidean;
  double q = 2.0;  // only meaningful for Norm::ell_q

  static CostSpec euclidean(double p = 2.0) { return CostSpec{p, Norm::euclidean, 2.0}; }
  static CostSpec ell1(double p = 1.0) { return CostSpec{p, Norm::ell_1, 1.0}; }
  static CostSpec ellinf(double p = 1.0) { return CostSpec{p, Norm::ell_inf, 1.0}; }
  static CostSpec ellq(double q, double p = 2.0) { return CostSpec{p, Norm::ell_q, q}; }

  /// Strictly convex norms admit unique Monge maps; ell_1 and ell_inf have
  /// flat faces on the unit sphere.
  bool strictly_convex_norm() const {
    return norm == Norm::euclidean || (norm == Norm::ell_q && q > 1.0 && std::isfinite(q));
  }
};

inline void validate_cost_spec(const CostSpec& c) {
  if (!std::isfinite(c.p) || c.p < 1.0) throw InvalidArgument("cost exponent requires p >= 1");
  if (c.norm == Norm::ell_q && !(c.q > 1.0 && std::isfinite(c.q)))
    throw UnsupportedNorm("ell_q requires finite q > 1");
}

inline double norm_value(const CostSpec& c, const std::vector<double>& d) {
  switch (c.norm) {
    case Norm::ell_1: {
      double s = 0;
      for (double x : d) s += std::fabs(x);
      return s;
    }
    case Norm::ell_inf: {
      double s = 0;
      for (double x : d) s = std::max(s, std::fabs(x));
      return s;
    }
    case Norm::ell_q: {
      double s = 0;
      for (double x : d) s += std::pow(std::fabs(x), c.q);
      return std::pow(s, 1.0 / c.q);
    }
    case Norm::euclidean:
    default: {
      double s = 0;
      for (double x : d) s += x * x;
      return std::sqrt(s);
    }
  }
}

template <class S>
S ground_cost(const CostSpec& c, const Point<S>& x, const Point<S>& y);

template <>
inline double ground_cost<double>(const CostSpec& c, const Point<double>& x,
                                  const Point<double>& y) {
  if (x.dim() != y.dim()) throw DimMismatch("cost between points of different dimension");
  std::vector<double> d(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) d[i] = x[i] - y[i];
  // exact powers for integral p keep dyadic test data exact
  if (c.norm == Norm::euclidean && c.p == 2.0) {
    double s = 0;
    for (double v : d) s += v * v;
    return s;
  }
  const double n = norm_value(c, d);
  if (is_integral_exponent(c.p)) return ipow(n, static_cast<unsigned>(c.p));
  return std::pow(n, c.p);
}

// Rational mode evaluates ||x-y||^p only where the value is itself rational:
// any norm in dimension one, ell_1/ell_inf with integral p, the euclidean
// norm with even p, and ell_q with integral q dividing p.
template <>
inline Rational ground_cost<Rational>(const CostSpec& c, const Point<Rational>& x,
                                      const Point<Rational>& y) {
  if (x.dim() != y.dim()) throw DimMismatch("cost between points of different dimension");
  if (!is_integral_exponent(c.p) || c.p < 1.0)
    throw UnsupportedCost("rational mode requires an integral exponent p >= 1");
  const unsigned p = static_cast<unsigned>(c.p);
  std::vector<Rational> d(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) d[i] = x[i] - y[i];

  if (x.dim() == 1) return ipow(abs_value(d[0]), p);

  switch (c.norm) {
    case Norm::ell_1: {
      Rational s(0);
      for (const Rational& v : d) s += abs_value(v);
      return ipow(s, p);
    }
    case Norm::ell_inf: {
      Rational s(0);
      for (const Rational& v : d) s = std::max(s, abs_value(v));
      return ipow(s, p);
    }
    case Norm::euclidean: {
      if (p % 2 != 0)
        throw UnsupportedCost("rational euclidean cost requires an even exponent p");
      Rational s(0);
      for (const Rational& v : d) s += v * v;
      return ipow(s, p / 2);
    }
    case Norm::ell_q:
    default: {
      if (!is_integral_exponent(c.q))
        throw UnsupportedCost("rational ell_q cost requires an integral q");
      const unsigned q = static_cast<unsigned>(c.q);
      if (q == 0 || p % q != 0)
        throw UnsupportedCost("rational ell_q cost requires q dividing p");
      Rational s(0);
      for (const Rational& v : d) s += ipow(abs_value(v), q);
      return ipow(s, p / q);
    }
  }
}

/// ||x - y|| (no exponent); used by the convergence-in-probability distance.
template <class S>
S ground_norm(const CostSpec& c, const Point<S>& x, const Point<S>& y);

template <>
inline double ground_norm<double>(const CostSpec& c, const Point<double>& x,
                                  const Point<double>& y) {
  if (x.dim() != y.dim()) throw DimMismatch("norm between points of different dimension");
  std::vector<double> d(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) d[i] = x[i] - y[i];
  return norm_value(c, d);
}

template <>
inline Rational ground_norm<Rational>(const CostSpec& c, const Point<Rational>& x,
                                      const Point<Rational>& y) {
  if (x.dim() != y.dim()) throw DimMismatch("norm between points of different dimension");
  std::vector<Rational> d(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) d[i] = x[i] - y[i];
  if (x.dim() == 1) return abs_value(d[0]);
  switch (c.norm) {
    case Norm::ell_1: {
      Rational s(0);
      for (const Rational& v : d) s += abs_value(v);
      return s;
    }
    case Norm::ell_inf: {
      Rational s(0);
      for (const Rational& v : d) s = std::max(s, abs_value(v));
      return s;
    }
    default:
      throw UnsupportedCost("rational norms are limited to ell_1/ell_inf beyond dimension one");
  }
}

}  // namespace wow
