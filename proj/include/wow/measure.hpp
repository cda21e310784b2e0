#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include "wow/cost.hpp"
#include "wow/errors.hpp"
#include "wow/point.hpp"
#include "wow/scalar.hpp"

namespace wow {

/// Finitely supported probability measure over atoms of type A. The same
/// template carries point-supported measures and measure-supported (nested)
/// measures; the atom policy functions (atom_less/atom_close/atom_merge)
/// select the behaviour.
template <class A, class S>
struct Measure {
  std::vector<A> atoms;
  std::vector<S> weights;

  Measure() = default;
  Measure(std::vector<A> a, std::vector<S> w) : atoms(std::move(a)), weights(std::move(w)) {}

  std::size_t size() const { return atoms.size(); }
};

template <class S>
using DiscreteMeasure = Measure<Point<S>, S>;
template <class S>
using NestedMeasure = Measure<DiscreteMeasure<S>, S>;

// ---- atom policies for measure-valued atoms -------------------------------

template <class S>
bool measure_eq(const DiscreteMeasure<S>& a, const DiscreteMeasure<S>& b, const S& tol);
template <class S>
bool measure_eq(const NestedMeasure<S>& a, const NestedMeasure<S>& b, const S& tol);

template <class S>
bool atom_less(const DiscreteMeasure<S>& a, const DiscreteMeasure<S>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (atom_less(a.atoms[k], b.atoms[k])) return true;
    if (atom_less(b.atoms[k], a.atoms[k])) return false;
  }
  return a.weights < b.weights;
}

template <class S>
bool atom_close(const DiscreteMeasure<S>& a, const DiscreteMeasure<S>& b, const S& tol) {
  return measure_eq(a, b, tol);
}

/// Clusters of tol-equal measures merge to their first (lex-least) member.
template <class S>
DiscreteMeasure<S> atom_merge(const std::vector<DiscreteMeasure<S>>& atoms,
                              const std::vector<S>&) {
  return atoms.front();
}

template <class S>
std::size_t atom_dim(const DiscreteMeasure<S>& m) {
  return m.atoms.empty() ? 0 : m.atoms.front().dim();
}

template <class S>
void validate_point_atom(const Point<S>& p) { validate_point(p); }

// ---- structural validation -------------------------------------------------

template <class A, class S>
void validate(const Measure<A, S>& m) {
  if (m.atoms.empty()) throw EmptyMeasure("measure without atoms");
  if (m.atoms.size() != m.weights.size())
    throw InvalidMeasure("atom/weight count mismatch");
  const std::size_t d = atom_dim(m.atoms.front());
  for (const A& a : m.atoms) {
    if constexpr (std::is_same_v<A, Point<S>>) validate_point(a);
    else validate(a);
    if (atom_dim(a) != d) throw DimMismatch("atoms of mixed dimension");
  }
  for (const S& w : m.weights) {
    if (!is_finite(w)) throw InvalidMeasure("non-finite weight");
    if (!(w > S(0))) throw InvalidMeasure("weights must be strictly positive");
  }
}

template <class A, class S>
S total_weight(const Measure<A, S>& m) {
  S t(0);
  for (const S& w : m.weights) t += w;
  return t;
}

template <class A, class S>
std::size_t dim(const Measure<A, S>& m) {
  return m.atoms.empty() ? 0 : atom_dim(m.atoms.front());
}

// ---- canonical form --------------------------------------------------------

namespace detail {

// Renormalization is skipped when the mass is already one (to the last few
// ulp in float mode), which makes canonicalization idempotent bit for bit.
inline bool needs_renormalization(double total, std::size_t n) {
  return std::abs(total - 1.0) > 1e-15 * 32 * static_cast<double>(n + 1);
}
inline bool needs_renormalization(const Rational& total, std::size_t) {
  return total != Rational(1);
}

template <class A, class S>
bool merge_pass(Measure<A, S>& m, const S& tol) {
  std::vector<std::size_t> order(m.atoms.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return atom_less(m.atoms[i], m.atoms[j]);
  });
  std::vector<A> atoms;
  std::vector<S> weights;
  bool merged = false;
  std::size_t k = 0;
  while (k < order.size()) {
    std::vector<A> cluster{m.atoms[order[k]]};
    std::vector<S> cluster_w{m.weights[order[k]]};
    std::size_t j = k + 1;
    while (j < order.size() && atom_close(m.atoms[order[j]], cluster.front(), tol)) {
      cluster.push_back(m.atoms[order[j]]);
      cluster_w.push_back(m.weights[order[j]]);
      ++j;
    }
    if (cluster.size() > 1) {
      merged = true;
      atoms.push_back(atom_merge(cluster, cluster_w));
      S w(0);
      for (const S& cw : cluster_w) w += cw;
      weights.push_back(w);
    } else {
      atoms.push_back(cluster.front());
      weights.push_back(cluster_w.front());
    }
    k = j;
  }
  m.atoms = std::move(atoms);
  m.weights = std::move(weights);
  return merged;
}

}  // namespace detail

/// Sorts atoms lexicographically, merges atoms within `tol`, drops zero
/// weights, and renormalizes the total mass to one. Merging repeats until a
/// fixed point so the operation is idempotent.
template <class A, class S>
Measure<A, S> canonicalize(const Measure<A, S>& input, const S& tol = S(0)) {
  Measure<A, S> m = input;
  if (m.atoms.size() != m.weights.size())
    throw InvalidMeasure("atom/weight count mismatch");
  // canonicalize tolerates (and removes) zero weights; negative mass is a bug
  std::vector<A> atoms;
  std::vector<S> weights;
  for (std::size_t k = 0; k < m.atoms.size(); ++k) {
    if (!is_finite(m.weights[k]) || m.weights[k] < S(0))
      throw InvalidMeasure("invalid weight");
    if (m.weights[k] > S(0)) {
      atoms.push_back(m.atoms[k]);
      weights.push_back(m.weights[k]);
    }
  }
  m.atoms = std::move(atoms);
  m.weights = std::move(weights);
  if (m.atoms.empty()) throw EmptyMeasure("all weights vanish");

  while (detail::merge_pass(m, tol)) {
  }
  const S total = total_weight(m);
  if (!(total > S(0))) throw EmptyMeasure("all weights vanish");
  if (detail::needs_renormalization(total, m.size()))
    for (S& w : m.weights) w /= total;
  validate(m);
  return m;
}

template <class A, class S>
bool is_canonical(const Measure<A, S>& m) {
  if (m.atoms.empty() || m.atoms.size() != m.weights.size()) return false;
  for (std::size_t k = 0; k + 1 < m.atoms.size(); ++k)
    if (!atom_less(m.atoms[k], m.atoms[k + 1])) return false;
  return true;
}

template <class A, class S>
void require_canonical(const Measure<A, S>& m, const char* who) {
  if (!is_canonical(m)) throw InvalidMeasure(std::string(who) + ": input measure not canonical");
}

/// Canonicalizes the inner atoms first, then the outer layer.
template <class S>
NestedMeasure<S> canonicalize_deep(const NestedMeasure<S>& m, const S& tol = S(0)) {
  NestedMeasure<S> out = m;
  for (auto& a : out.atoms) a = canonicalize(a, tol);
  return canonicalize(out, tol);
}

// ---- equality --------------------------------------------------------------

template <class A, class S>
bool measure_eq_impl(const Measure<A, S>& a, const Measure<A, S>& b, const S& tol) {
  if (a.size() != b.size()) return false;
  if (a.size() > 0 && dim(a) != dim(b)) throw DimMismatch("measures of different dimension");
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (abs_value(a.weights[k] - b.weights[k]) > tol) return false;
    if (!atom_close(a.atoms[k], b.atoms[k], tol)) return false;
  }
  return true;
}

/// Decidable equality on canonicalized measures: same support count, atom-wise
/// coordinate distance <= tol, weight difference <= tol.
template <class S>
bool measure_eq(const DiscreteMeasure<S>& a, const DiscreteMeasure<S>& b, const S& tol) {
  return measure_eq_impl(a, b, tol);
}

template <class S>
bool measure_eq(const NestedMeasure<S>& a, const NestedMeasure<S>& b, const S& tol) {
  return measure_eq_impl(a, b, tol);
}

// ---- constructors ----------------------------------------------------------

template <class S>
DiscreteMeasure<S> dirac(const Point<S>& x) {
  return canonicalize(DiscreteMeasure<S>{{x}, {S(1)}});
}

template <class S>
DiscreteMeasure<S> uniform_on(std::vector<Point<S>> points) {
  const std::size_t n = points.size();
  return canonicalize(DiscreteMeasure<S>{std::move(points), std::vector<S>(n, S(1))});
}

template <class S>
NestedMeasure<S> nested_dirac(const DiscreteMeasure<S>& mu) {
  return canonicalize(NestedMeasure<S>{{mu}, {S(1)}});
}

// ---- derived quantities ----------------------------------------------------

/// Weighted mixture of the inner atoms of a nested measure.
template <class S>
DiscreteMeasure<S> intensity(const NestedMeasure<S>& m) {
  require_canonical(m, "intensity");
  DiscreteMeasure<S> mix;
  for (std::size_t k = 0; k < m.size(); ++k) {
    for (std::size_t i = 0; i < m.atoms[k].size(); ++i) {
      mix.atoms.push_back(m.atoms[k].atoms[i]);
      mix.weights.push_back(m.weights[k] * m.atoms[k].weights[i]);
    }
  }
  return canonicalize(mix);
}

/// Integral of ||x||^p against mu (the p-moment around the origin).
template <class S>
S p_moment(const DiscreteMeasure<S>& mu, const CostSpec& c) {
  Point<S> origin;
  origin.coords.assign(dim(mu), S(0));
  S m(0);
  for (std::size_t k = 0; k < mu.size(); ++k)
    m += mu.weights[k] * ground_cost<S>(c, mu.atoms[k], origin);
  return m;
}

/// The natural integrability gauge a_p(x) = 2^{p-1} ||x||^p integrated
/// against mu; finite by construction at finite support.
template <class S>
S a_moment(const DiscreteMeasure<S>& mu, const CostSpec& c) {
  if (!is_integral_exponent(c.p))
    return scalar_from_double<S>(std::pow(2.0, c.p - 1.0)) * p_moment(mu, c);
  return ipow(S(2), static_cast<unsigned>(c.p) - 1) * p_moment(mu, c);
}

template <class A, class S>
int find_atom_index(const Measure<A, S>& m, const A& atom, const S& tol) {
  for (std::size_t k = 0; k < m.size(); ++k)
    if (atom_close(m.atoms[k], atom, tol)) return static_cast<int>(k);
  return -1;
}

}  // namespace wow
