// Test-only oracles, independent of the network simplex implementation path:
//  - exhaustive enumeration of transportation-polytope vertices (greedy
//    crossing-out over every cell order),
//  - an exact successive-shortest-path min-cost flow on integerized masses,
//  - seeded rational instance generators.
#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "wow/wow.hpp"

namespace oracle {

using wow::BigInt;
using wow::Matrix;
using wow::Rational;

// ---- vertex enumeration -------------------------------------------------------

inline void enumerate_vertices_rec(std::vector<Rational>& ra, std::vector<Rational>& rb,
                                   Matrix<Rational>& plan,
                                   std::set<std::vector<Rational>>& out, long& budget) {
  if (--budget < 0) throw wow::BudgetExceeded("vertex enumeration budget");
  bool exhausted = true;
  for (const auto& x : ra)
    if (x > 0) exhausted = false;
  if (exhausted) {
    std::vector<Rational> flat;
    flat.reserve(plan.size() * plan[0].size());
    for (const auto& row : plan) flat.insert(flat.end(), row.begin(), row.end());
    out.insert(std::move(flat));
    return;
  }
  for (std::size_t i = 0; i < ra.size(); ++i) {
    if (!(ra[i] > 0)) continue;
    for (std::size_t j = 0; j < rb.size(); ++j) {
      if (!(rb[j] > 0)) continue;
      const Rational x = std::min(ra[i], rb[j]);
      ra[i] -= x;
      rb[j] -= x;
      plan[i][j] += x;
      enumerate_vertices_rec(ra, rb, plan, out, budget);
      plan[i][j] -= x;
      ra[i] += x;
      rb[j] += x;
    }
  }
}

/// Every vertex of the transportation polytope arises from some greedy
/// crossing-out order, so the set of greedy outcomes is exactly the vertex
/// set. Exponential; meant for supports <= 4.
inline std::vector<Matrix<Rational>> enumerate_vertices(const std::vector<Rational>& supply,
                                                        const std::vector<Rational>& demand,
                                                        long budget = 8000000) {
  std::vector<Rational> ra = supply, rb = demand;
  Matrix<Rational> plan(supply.size(), std::vector<Rational>(demand.size(), Rational(0)));
  std::set<std::vector<Rational>> flat_set;
  enumerate_vertices_rec(ra, rb, plan, flat_set, budget);
  std::vector<Matrix<Rational>> vertices;
  for (const auto& flat : flat_set) {
    Matrix<Rational> v(supply.size(), std::vector<Rational>(demand.size()));
    for (std::size_t i = 0; i < supply.size(); ++i)
      for (std::size_t j = 0; j < demand.size(); ++j) v[i][j] = flat[i * demand.size() + j];
    vertices.push_back(std::move(v));
  }
  return vertices;
}

inline Rational vertex_min_cost(const std::vector<Rational>& supply,
                                const std::vector<Rational>& demand,
                                const Matrix<Rational>& cost) {
  const auto vertices = enumerate_vertices(supply, demand);
  Rational best(0);
  bool first = true;
  for (const auto& v : vertices) {
    Rational value(0);
    for (std::size_t i = 0; i < supply.size(); ++i)
      for (std::size_t j = 0; j < demand.size(); ++j) value += v[i][j] * cost[i][j];
    if (first || value < best) {
      best = value;
      first = false;
    }
  }
  return best;
}

// ---- successive shortest paths ---------------------------------------------------

/// Exact transportation optimum via min-cost flow with Bellman-Ford path
/// search on integerized masses. Entirely independent of the simplex code.
inline Rational transport_ssp(const std::vector<Rational>& supply,
                              const std::vector<Rational>& demand,
                              const Matrix<Rational>& cost) {
  const std::size_t m = supply.size(), n = demand.size();
  BigInt scale = 1;
  const auto lcm_in = [&](const Rational& x) {
    const BigInt d = denominator(x);
    scale = scale / gcd(scale, d) * d;
  };
  for (const auto& x : supply) lcm_in(x);
  for (const auto& x : demand) lcm_in(x);
  std::vector<BigInt> A(m), B(n);
  for (std::size_t i = 0; i < m; ++i) A[i] = numerator(supply[i] * Rational(scale));
  for (std::size_t j = 0; j < n; ++j) B[j] = numerator(demand[j] * Rational(scale));

  Matrix<BigInt> flow(m, std::vector<BigInt>(n, BigInt(0)));
  // nodes: 0 = source, 1..m = rows, m+1..m+n = cols, m+n+1 = sink
  const int S = 0, T = static_cast<int>(m + n) + 1;
  const auto row = [&](std::size_t i) { return static_cast<int>(i) + 1; };
  const auto col = [&](std::size_t j) { return static_cast<int>(m + j) + 1; };

  while (true) {
    BigInt pending = 0;
    for (const auto& a : A) pending += a;
    if (pending == 0) break;

    const int V = T + 1;
    const Rational inf = Rational(1);
    std::vector<Rational> dist(V, Rational(0));
    std::vector<char> reached(V, 0);
    std::vector<std::pair<int, int>> via(V, {-1, -1});  // predecessor node, arc tag
    reached[S] = 1;
    for (int pass = 0; pass < V; ++pass) {
      bool changed = false;
      for (std::size_t i = 0; i < m; ++i) {
        if (A[i] > 0 && reached[S] && (!reached[row(i)] || dist[row(i)] > dist[S])) {
          dist[row(i)] = dist[S];
          reached[row(i)] = 1;
          via[row(i)] = {S, 0};
          changed = true;
        }
        for (std::size_t j = 0; j < n; ++j) {
          if (reached[row(i)] &&
              (!reached[col(j)] || dist[col(j)] > dist[row(i)] + cost[i][j])) {
            dist[col(j)] = dist[row(i)] + cost[i][j];
            reached[col(j)] = 1;
            via[col(j)] = {row(i), 1};
            changed = true;
          }
          if (flow[i][j] > 0 && reached[col(j)] &&
              (!reached[row(i)] || dist[row(i)] > dist[col(j)] - cost[i][j])) {
            dist[row(i)] = dist[col(j)] - cost[i][j];
            reached[row(i)] = 1;
            via[row(i)] = {col(j), 2};
            changed = true;
          }
        }
      }
      for (std::size_t j = 0; j < n; ++j)
        if (B[j] > 0 && reached[col(j)] && (!reached[T] || dist[T] > dist[col(j)])) {
          dist[T] = dist[col(j)];
          reached[T] = 1;
          via[T] = {col(j), 3};
          changed = true;
        }
      if (!changed) break;
    }
    if (!reached[T]) throw wow::NumericalFailure("ssp oracle: no augmenting path");

    // bottleneck along the path
    BigInt bottleneck = pending;
    for (int node = T; node != S;) {
      const auto [prev, tag] = via[node];
      if (tag == 0) bottleneck = std::min(bottleneck, A[node - 1]);
      if (tag == 2) {
        const std::size_t i = static_cast<std::size_t>(node - 1);
        const std::size_t j = static_cast<std::size_t>(prev - 1 - static_cast<int>(m));
        bottleneck = std::min(bottleneck, flow[i][j]);
      }
      if (tag == 3) bottleneck = std::min(bottleneck, B[prev - 1 - static_cast<int>(m)]);
      node = prev;
    }
    for (int node = T; node != S;) {
      const auto [prev, tag] = via[node];
      if (tag == 0) A[node - 1] -= bottleneck;
      if (tag == 1) {
        const std::size_t i = static_cast<std::size_t>(prev - 1);
        const std::size_t j = static_cast<std::size_t>(node - 1 - static_cast<int>(m));
        flow[i][j] += bottleneck;
      }
      if (tag == 2) {
        const std::size_t i = static_cast<std::size_t>(node - 1);
        const std::size_t j = static_cast<std::size_t>(prev - 1 - static_cast<int>(m));
        flow[i][j] -= bottleneck;
      }
      if (tag == 3) B[prev - 1 - static_cast<int>(m)] -= bottleneck;
      node = prev;
    }
    (void)inf;
  }

  Rational total(0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (flow[i][j] > 0) total += Rational(flow[i][j]) * cost[i][j];
  return total / Rational(scale);
}

/// Brute-force nested optimum: minimum over enumerated outer vertices of the
/// integral of exact inner optima (equivalently, the minimum over vertex
/// random couplings with per-cell optimal inner vertices).
inline Rational nested_brute_force(const wow::NestedMeasure<Rational>& M1,
                                   const wow::NestedMeasure<Rational>& M2,
                                   const wow::CostSpec& c) {
  Matrix<Rational> C(M1.size(), std::vector<Rational>(M2.size()));
  for (std::size_t i = 0; i < M1.size(); ++i)
    for (std::size_t j = 0; j < M2.size(); ++j)
      C[i][j] = transport_ssp(M1.atoms[i].weights, M2.atoms[j].weights,
                              wow::cost_matrix(M1.atoms[i], M2.atoms[j], c));
  return vertex_min_cost(M1.weights, M2.weights, C);
}

// ---- seeded generators ----------------------------------------------------------

inline long long uniform_int(std::mt19937_64& rng, long long lo, long long hi) {
  return lo + static_cast<long long>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Random rational measure: integer-quarter coordinates, random positive
/// integer weights normalized to one.
inline wow::DiscreteMeasure<Rational> random_measure(std::mt19937_64& rng, int max_support,
                                                     int dim, int coord_range = 16,
                                                     int max_weight = 9) {
  const int n = static_cast<int>(uniform_int(rng, 1, max_support));
  wow::DiscreteMeasure<Rational> m;
  for (int k = 0; k < n; ++k) {
    wow::Point<Rational> p;
    for (int d = 0; d < dim; ++d)
      p.coords.push_back(Rational(uniform_int(rng, -coord_range, coord_range)) / Rational(4));
    m.atoms.push_back(std::move(p));
    m.weights.push_back(Rational(uniform_int(rng, 1, max_weight)));
  }
  return wow::canonicalize(m);
}

inline wow::NestedMeasure<Rational> random_nested(std::mt19937_64& rng, int max_outer,
                                                  int max_inner, int dim,
                                                  int coord_range = 16) {
  const int n = static_cast<int>(uniform_int(rng, 1, max_outer));
  wow::NestedMeasure<Rational> M;
  for (int k = 0; k < n; ++k) {
    M.atoms.push_back(random_measure(rng, max_inner, dim, coord_range));
    M.weights.push_back(Rational(uniform_int(rng, 1, 9)));
  }
  return wow::canonicalize_deep(M);
}

inline wow::DiscreteMeasure<double> to_double_measure(const wow::DiscreteMeasure<Rational>& m) {
  wow::DiscreteMeasure<double> out;
  for (const auto& a : m.atoms) {
    wow::Point<double> p;
    for (const auto& c : a.coords) p.coords.push_back(wow::to_double(c));
    out.atoms.push_back(std::move(p));
  }
  for (const auto& w : m.weights) out.weights.push_back(wow::to_double(w));
  return wow::canonicalize(out);
}

inline wow::NestedMeasure<double> to_double_nested(const wow::NestedMeasure<Rational>& M) {
  wow::NestedMeasure<double> out;
  for (const auto& a : M.atoms) out.atoms.push_back(to_double_measure(a));
  for (const auto& w : M.weights) out.weights.push_back(wow::to_double(w));
  return wow::canonicalize_deep(out);
}

/// Jittered uniform grid in one dimension: distinct points, uniform weights.
inline wow::DiscreteMeasure<double> jittered_grid_1d(std::mt19937_64& rng, int n,
                                                     double origin, double spacing) {
  std::vector<wow::Point<double>> pts;
  for (int k = 0; k < n; ++k) {
    const double jitter = 0.3 * spacing * (((rng() >> 11) * 0x1.0p-53) - 0.5);
    pts.push_back(wow::point1(origin + spacing * k + jitter));
  }
  return wow::uniform_on(std::move(pts));
}

}  // namespace oracle
