#pragma once

#include <cstddef>
#include <vector>

#include "wow/errors.hpp"
#include "wow/scalar.hpp"

namespace wow {

/// A point of R^d. The dimension is the coordinate count.
template <class S>
struct Point {
  std::vector<S> coords;

  Point() = default;
  explicit Point(std::vector<S> c) : coords(std::move(c)) {}

  std::size_t dim() const { return coords.size(); }
  const S& operator[](std::size_t i) const { return coords[i]; }
  S& operator[](std::size_t i) { return coords[i]; }

  friend bool operator==(const Point& a, const Point& b) { return a.coords == b.coords; }
};

template <class S>
Point<S> point1(const S& x) { return Point<S>{std::vector<S>{x}}; }

inline Point<double> point1(double x) { return Point<double>{std::vector<double>{x}}; }

template <class S>
void validate_point(const Point<S>& p) {
  if (p.coords.empty()) throw InvalidMeasure("zero-dimensional point");
  for (const S& c : p.coords)
    if (!is_finite(c)) throw InvalidMeasure("non-finite coordinate");
}

template <class S>
bool atom_less(const Point<S>& a, const Point<S>& b) {
  if (a.dim() != b.dim()) return a.dim() < b.dim();
  for (std::size_t i = 0; i < a.dim(); ++i) {
    if (a[i] < b[i]) return true;
    if (b[i] < a[i]) return false;
  }
  return false;
}

/// Coordinate-wise (sup-norm) closeness used by canonical merging.
template <class S>
bool atom_close(const Point<S>& a, const Point<S>& b, const S& tol) {
  if (a.dim() != b.dim()) throw DimMismatch("point dimensions differ");
  for (std::size_t i = 0; i < a.dim(); ++i)
    if (abs_value(a[i] - b[i]) > tol) return false;
  return true;
}

template <class S>
Point<S> atom_merge(const std::vector<Point<S>>& atoms, const std::vector<S>& weights) {
  bool all_equal = true;
  for (std::size_t k = 1; k < atoms.size() && all_equal; ++k)
    all_equal = atoms[k] == atoms.front();
  if (all_equal) return atoms.front();
  Point<S> centroid;
  centroid.coords.assign(atoms.front().dim(), S(0));
  S total(0);
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    total += weights[k];
    for (std::size_t i = 0; i < centroid.dim(); ++i) centroid[i] += weights[k] * atoms[k][i];
  }
  for (std::size_t i = 0; i < centroid.dim(); ++i) centroid[i] /= total;
  return centroid;
}

template <class S>
std::size_t atom_dim(const Point<S>& p) { return p.dim(); }

}  // namespace wow
