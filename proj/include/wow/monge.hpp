#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wow/certificates.hpp"
#include "wow/outer_ot.hpp"

namespace wow {

/// Two-level transport map: an assignment of M1 atoms to M2 atoms together
/// with, for every M1 atom, the image of each of its support points.
template <class S>
struct NestedMap {
  std::vector<int> outer_assignment;
  std::vector<std::vector<Point<S>>> point_images;
};

template <class S>
struct StrictMongeSolution {
  NestedMap<S> map;
  S value;
  S kantorovich_value;
  S gap;  // value - kantorovich_value
};

namespace monge {

/// Extracts the source->target map of a plan when every row has at most one
/// cell with mass above tol; otherwise nothing.
template <class S>
std::optional<std::vector<int>> is_deterministic(const Coupling<S>& pi, const S& tol) {
  std::vector<int> map(pi.source.size(), -1);
  for (std::size_t i = 0; i < pi.source.size(); ++i) {
    int hit = -1, best = 0;
    for (std::size_t j = 0; j < pi.target.size(); ++j) {
      if (pi.matrix[i][j] > pi.matrix[i][best]) best = static_cast<int>(j);
      if (pi.matrix[i][j] > tol) {
        if (hit >= 0) return std::nullopt;
        hit = static_cast<int>(j);
      }
    }
    map[i] = hit >= 0 ? hit : best;
  }
  return map;
}

/// P = sum_i w_i delta_{(id, T(., mu_i))_sharp mu_i} for the given map.
template <class S>
RandomCoupling<S> make_random_coupling(const NestedMap<S>& map, const NestedMeasure<S>& M1) {
  if (map.point_images.size() != M1.size())
    throw PushforwardMismatch("map does not cover every atom of M1");
  RandomCoupling<S> P;
  for (std::size_t i = 0; i < M1.size(); ++i) {
    const DiscreteMeasure<S>& mu = M1.atoms[i];
    const auto& images = map.point_images[i];
    if (images.size() != mu.size())
      throw PushforwardMismatch("map does not cover the support of an atom");
    DiscreteMeasure<S> target{images, mu.weights};
    target = canonicalize(target);
    Coupling<S> plan{mu, target, Matrix<S>(mu.size(), std::vector<S>(target.size(), S(0)))};
    for (std::size_t k = 0; k < mu.size(); ++k) {
      const int j = find_atom_index(target, images[k], S(0));
      if (j < 0) throw PushforwardMismatch("image point lost during canonicalization");
      plan.matrix[k][j] += mu.weights[k];
    }
    P.atoms.push_back(std::move(plan));
    P.weights.push_back(M1.weights[i]);
  }
  return P;
}

/// The measure-level pushforward T_sharp M1 of a nested map.
template <class S>
NestedMeasure<S> pushforward(const NestedMap<S>& map, const NestedMeasure<S>& M1) {
  const RandomCoupling<S> P = make_random_coupling(map, M1);
  return marginal_law(P, 2);
}

/// Recovers a NestedMap from a fully deterministic random coupling: the
/// induced outer coupling must be deterministic at measure level, every atom
/// must be a deterministic plan, and each M1 atom must carry a single plan.
template <class S>
std::optional<NestedMap<S>> is_fully_deterministic(const RandomCoupling<S>& P,
                                                   const NestedMeasure<S>& M1,
                                                   const NestedMeasure<S>& M2, const S& tol) {
  NestedMap<S> map;
  map.outer_assignment.assign(M1.size(), -1);
  map.point_images.resize(M1.size());
  std::vector<const Coupling<S>*> plan_of(M1.size(), nullptr);
  for (std::size_t k = 0; k < P.size(); ++k) {
    if (!(P.weights[k] > S(0))) continue;
    const int i = find_atom_index(M1, P.atoms[k].source, tol);
    if (i < 0) throw IndexMismatch("random-coupling marginal is not an atom of M1");
    if (plan_of[i] != nullptr) {
      // a second, different plan over the same atom cannot come from one map
      const Coupling<S>& seen = *plan_of[i];
      bool same = seen.target.size() == P.atoms[k].target.size() &&
                  measure_eq(seen.target, P.atoms[k].target, tol);
      if (same)
        for (std::size_t a = 0; a < seen.matrix.size() && same; ++a)
          for (std::size_t b = 0; b < seen.matrix[a].size() && same; ++b)
            same = !(abs_value(seen.matrix[a][b] - P.atoms[k].matrix[a][b]) > tol);
      if (!same) return std::nullopt;
      continue;
    }
    plan_of[i] = &P.atoms[k];
  }
  for (std::size_t i = 0; i < M1.size(); ++i) {
    if (plan_of[i] == nullptr) return std::nullopt;
    const auto rows = is_deterministic(*plan_of[i], tol);
    if (!rows) return std::nullopt;
    const int j = find_atom_index(M2, plan_of[i]->target, tol);
    if (j < 0) throw IndexMismatch("random-coupling marginal is not an atom of M2");
    map.outer_assignment[i] = j;
    map.point_images[i].reserve(plan_of[i]->source.size());
    for (std::size_t k = 0; k < plan_of[i]->source.size(); ++k)
      map.point_images[i].push_back(plan_of[i]->target.atoms[(*rows)[k]]);
  }
  return map;
}

namespace detail {

// Inner optimal-cost lookup keyed by the canonical forms of the atom pair.
template <class S>
struct CostCache {
  std::vector<std::pair<DiscreteMeasure<S>, DiscreteMeasure<S>>> keys;
  std::vector<S> values;
  const CostSpec* spec;

  S operator()(const DiscreteMeasure<S>& a, const DiscreteMeasure<S>& b) {
    for (std::size_t k = 0; k < keys.size(); ++k)
      if (measure_eq(keys[k].first, a, S(0)) && measure_eq(keys[k].second, b, S(0)))
        return values[k];
    const S v = inner::solve(a, b, *spec).cost;
    keys.emplace_back(a, b);
    values.push_back(v);
    return v;
  }
};

template <class S>
bool uniform_weights(const std::vector<S>& w, const S& tol) {
  if (w.empty()) return false;
  const S expected = S(1) / S(static_cast<long long>(w.size()));
  for (const S& x : w)
    if (abs_value(x - expected) > tol) return false;
  return true;
}

}  // namespace detail

/// Strict-Monge solver on the exactly solvable subclass: equal atom counts
/// with uniform outer weights, and inner pairs that are either equal-size
/// uniform (the assignment vertex is a permutation, hence a map) or
/// one-dimensional with a deterministic monotone plan.
template <class S>
StrictMongeSolution<S> strict_monge_equal_size(const NestedMeasure<S>& M1,
                                               const NestedMeasure<S>& M2, const CostSpec& c) {
  validate_cost_spec(c);
  validate(M1);
  validate(M2);
  const Tolerances<S> tol = default_tolerances<S>();
  const std::size_t n = M1.size();
  if (M2.size() != n) throw NotEqualSize("outer atom counts differ");
  if (!detail::uniform_weights(M1.weights, tol.sum) ||
      !detail::uniform_weights(M2.weights, tol.sum))
    throw NotEqualSize("outer weights are not uniform");

  // outer assignment on the inner-cost matrix; the uniform-marginal vertex is
  // a permutation (Birkhoff), which we assert
  const auto canon1 = canonicalize_deep(M1);
  const auto canon2 = canonicalize_deep(M2);
  detail::CostCache<S> cache;
  cache.spec = &c;
  std::vector<DiscreteMeasure<S>> c1(n), c2(n);
  for (std::size_t i = 0; i < n; ++i) c1[i] = canonicalize(M1.atoms[i]);
  for (std::size_t j = 0; j < n; ++j) c2[j] = canonicalize(M2.atoms[j]);
  Matrix<S> outer_cost(n, std::vector<S>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) outer_cost[i][j] = cache(c1[i], c2[j]);
  const TransportSolution<S> outer = solve_transport(M1.weights, M2.weights, outer_cost);

  StrictMongeSolution<S> out;
  out.map.outer_assignment.assign(n, -1);
  out.map.point_images.resize(n);
  const S cutoff = support_cutoff<S>();
  for (std::size_t i = 0; i < n; ++i) {
    int hit = -1;
    for (std::size_t j = 0; j < n; ++j)
      if (outer.plan[i][j] > cutoff) {
        if (hit >= 0) throw NumericalFailure("outer vertex is not a permutation");
        hit = static_cast<int>(j);
      }
    if (hit < 0) throw NumericalFailure("outer vertex misses a row");
    out.map.outer_assignment[i] = hit;
  }

  out.value = S(0);
  for (std::size_t i = 0; i < n; ++i) {
    const DiscreteMeasure<S>& mu = M1.atoms[i];
    const DiscreteMeasure<S>& nu = M2.atoms[out.map.outer_assignment[i]];
    std::vector<int> rows;
    if (mu.size() == nu.size() && detail::uniform_weights(mu.weights, tol.sum) &&
        detail::uniform_weights(nu.weights, tol.sum)) {
      const Matrix<S> cm = cost_matrix(mu, nu, c);
      const TransportSolution<S> assign = solve_transport(mu.weights, nu.weights, cm);
      rows.assign(mu.size(), -1);
      for (std::size_t k = 0; k < mu.size(); ++k) {
        int hit = -1;
        for (std::size_t l = 0; l < nu.size(); ++l)
          if (assign.plan[k][l] > cutoff) {
            if (hit >= 0) throw NumericalFailure("inner vertex is not a permutation");
            hit = static_cast<int>(l);
          }
        if (hit < 0) throw NumericalFailure("inner vertex misses a row");
        rows[k] = hit;
      }
    } else if (dim(mu) == 1 && is_canonical(mu) && is_canonical(nu)) {
      const InnerSolution<S> mono = inner::solve_1d_monotone(mu, nu, c);
      const auto det = is_deterministic(mono.plan, tol.sum);
      if (!det) throw NotEqualSize("monotone plan splits an atom; no strict map exists");
      rows = *det;
    } else {
      throw NotEqualSize("inner pair admits no strict map on this subclass");
    }
    out.map.point_images[i].reserve(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
      out.map.point_images[i].push_back(nu.atoms[rows[k]]);
      out.value += M1.weights[i] * mu.weights[k] *
                   ground_cost<S>(c, mu.atoms[k], nu.atoms[rows[k]]);
    }
  }

  out.kantorovich_value = solve_nested(canon1, canon2, c).cost;
  out.gap = out.value - out.kantorovich_value;
  return out;
}

// ---- quantization ------------------------------------------------------------

/// Quantile quantization with the midpoint rule: point j sits at the
/// (j+1/2)/K quantile of mu. The result keeps duplicates and is not merged.
template <class S>
DiscreteMeasure<S> quantize_1d(const DiscreteMeasure<S>& mu, std::size_t K) {
  require_canonical(mu, "quantize_1d");
  if (dim(mu) != 1) throw DimNotOne("quantize_1d requires dimension one");
  DiscreteMeasure<S> out;
  const S unit = S(1) / S(static_cast<long long>(K));
  std::size_t idx = 0;
  S cumulative = mu.weights[0];
  for (std::size_t j = 0; j < K; ++j) {
    const S t = (S(2 * static_cast<long long>(j) + 1)) / (S(2) * S(static_cast<long long>(K)));
    while (idx + 1 < mu.size() && !(cumulative > t)) {
      ++idx;
      cumulative += mu.weights[idx];
    }
    out.atoms.push_back(mu.atoms[idx]);
    out.weights.push_back(unit);
  }
  return out;
}

/// Equal-mass kd quantization in the plane: k alternating median splits give
/// 2^k cells of equal mass, each represented by its conditional centroid.
template <class S>
DiscreteMeasure<S> quantize_2d(const DiscreteMeasure<S>& mu, std::size_t levels) {
  require_canonical(mu, "quantize_2d");
  if (dim(mu) != 2) throw DimMismatch("quantize_2d requires dimension two");
  using Cell = std::vector<std::pair<Point<S>, S>>;
  std::vector<Cell> cells(1);
  for (std::size_t k = 0; k < mu.size(); ++k) cells[0].push_back({mu.atoms[k], mu.weights[k]});

  for (std::size_t depth = 0; depth < levels; ++depth) {
    const std::size_t axis = depth % 2;
    std::vector<Cell> next;
    for (Cell& cell : cells) {
      std::sort(cell.begin(), cell.end(), [&](const auto& a, const auto& b) {
        if (a.first[axis] < b.first[axis]) return true;
        if (b.first[axis] < a.first[axis]) return false;
        return atom_less(a.first, b.first);
      });
      S total(0);
      for (const auto& [p, w] : cell) total += w;
      const S half = total / S(2);
      Cell low, high;
      S acc(0);
      for (auto& [p, w] : cell) {
        if (!(acc < half)) {
          high.push_back({p, w});
        } else if (acc + w > half) {
          low.push_back({p, half - acc});
          high.push_back({p, acc + w - half});
        } else {
          low.push_back({p, w});
        }
        acc += w;
      }
      next.push_back(std::move(low));
      next.push_back(std::move(high));
    }
    cells = std::move(next);
  }

  DiscreteMeasure<S> out;
  for (const Cell& cell : cells) {
    S mass(0);
    Point<S> centroid{std::vector<S>{S(0), S(0)}};
    for (const auto& [p, w] : cell) {
      mass += w;
      centroid[0] += w * p[0];
      centroid[1] += w * p[1];
    }
    centroid[0] /= mass;
    centroid[1] /= mass;
    out.atoms.push_back(centroid);
    out.weights.push_back(mass);
  }
  return out;
}

template <class S>
DiscreteMeasure<S> quantize_inner(const DiscreteMeasure<S>& mu, std::size_t level) {
  const std::size_t K = std::size_t(1) << level;
  if (dim(mu) == 1) return quantize_1d(mu, K);
  if (dim(mu) == 2) return quantize_2d(mu, level);
  throw InvalidArgument("quantization supports dimensions one and two");
}

/// Replicates a nested measure onto 2^level equal-weight outer slots by
/// outer quantile sampling, with every inner atom quantized to 2^level
/// equal-weight points first.
template <class S>
NestedMeasure<S> quantize_nested(const NestedMeasure<S>& M, std::size_t level) {
  require_canonical(M, "quantize_nested");
  const std::size_t K = std::size_t(1) << level;
  std::vector<DiscreteMeasure<S>> quantized(M.size());
  for (std::size_t k = 0; k < M.size(); ++k) quantized[k] = quantize_inner(M.atoms[k], level);
  NestedMeasure<S> out;
  const S unit = S(1) / S(static_cast<long long>(K));
  std::size_t idx = 0;
  S cumulative = M.weights[0];
  for (std::size_t j = 0; j < K; ++j) {
    const S t = (S(2 * static_cast<long long>(j) + 1)) / (S(2) * S(static_cast<long long>(K)));
    while (idx + 1 < M.size() && !(cumulative > t)) {
      ++idx;
      cumulative += M.weights[idx];
    }
    out.atoms.push_back(quantized[idx]);
    out.weights.push_back(unit);
  }
  return out;
}

/// One row per refinement level; gap = |strict_monge - kantorovich| measures
/// how closely two-level maps on the quantized instance reproduce the
/// Kantorovich value of the original instance.
template <class S>
struct PratelliRow {
  int level;
  S kantorovich;
  S strict_monge;
  S gap;
};

template <class S>
std::vector<PratelliRow<S>> pratelli_refinement_experiment(const NestedMeasure<S>& M1,
                                                           const NestedMeasure<S>& M2,
                                                           const CostSpec& c, int levels,
                                                           int jobs = 1) {
  if (levels < 1 || levels > 8) throw BudgetExceeded("levels must lie in 1..8");
  require_canonical(M1, "pratelli_refinement_experiment");
  require_canonical(M2, "pratelli_refinement_experiment");
  const S kant = solve_nested(M1, M2, c, jobs).cost;
  std::vector<PratelliRow<S>> rows;
  for (int level = 1; level <= levels; ++level) {
    const NestedMeasure<S> Q1 = quantize_nested(M1, level);
    const NestedMeasure<S> Q2 = quantize_nested(M2, level);
    const S strict = strict_monge_equal_size(Q1, Q2, c).value;
    rows.push_back(PratelliRow<S>{level, kant, strict, abs_value(strict - kant)});
  }
  return rows;
}

// ---- strict convexity and uniqueness ----------------------------------------

struct ConvexityWitness {
  std::optional<std::pair<Point<double>, Point<double>>> flat_pair;
  bool scan_performed = false;
  int scanned_pairs = 0;
  double max_midpoint_norm = 0.0;  // over scanned unit pairs with separation >= 1e-2
};

/// For ell_1/ell_inf returns a flat-face pair x != y with
/// ||x|| = ||y|| = ||(x+y)/2|| = 1; for strictly convex norms scans random
/// separated unit pairs and reports the largest midpoint norm found.
inline ConvexityWitness strict_convexity_witness(const CostSpec& spec, int dims,
                                                 std::uint64_t seed = 0) {
  validate_cost_spec(spec);
  if (dims < 2) throw InvalidArgument("strict_convexity_witness requires dimension >= 2");
  ConvexityWitness w;
  const auto embed = [&](std::initializer_list<double> head) {
    Point<double> p;
    p.coords.assign(dims, 0.0);
    std::size_t k = 0;
    for (double v : head) p.coords[k++] = v;
    return p;
  };
  if (spec.norm == Norm::ell_inf) {
    w.flat_pair = {embed({1.0, 1.0}), embed({1.0, -1.0})};
    return w;
  }
  if (spec.norm == Norm::ell_1) {
    w.flat_pair = {embed({1.0, 0.0}), embed({0.0, 1.0})};
    return w;
  }
  std::mt19937_64 rng(seed);
  const auto unit = [&] {
    Point<double> p;
    p.coords.resize(dims);
    double n = 0;
    do {
      for (int k = 0; k < dims; ++k) p.coords[k] = 2.0 * ((rng() >> 11) * 0x1.0p-53) - 1.0;
      Point<double> zero;
      zero.coords.assign(dims, 0.0);
      n = ground_norm<double>(spec, p, zero);
    } while (n < 1e-6);
    for (int k = 0; k < dims; ++k) p.coords[k] /= n;
    return p;
  };
  w.scan_performed = true;
  Point<double> zero;
  zero.coords.assign(dims, 0.0);
  while (w.scanned_pairs < 1000) {
    const Point<double> x = unit(), y = unit();
    if (ground_norm<double>(spec, x, y) < 1e-2) continue;
    Point<double> mid;
    mid.coords.resize(dims);
    for (int k = 0; k < dims; ++k) mid.coords[k] = 0.5 * (x[k] + y[k]);
    w.max_midpoint_norm =
        std::max(w.max_midpoint_norm, ground_norm<double>(spec, mid, zero));
    ++w.scanned_pairs;
  }
  return w;
}

/// The sup-norm non-uniqueness instance: uniform grids on [0,1]x[0,2] and
/// [2,3]x[0,2], the shift map (x,y) -> (x+2,y) and the half-swap map
/// (x,y) -> (x+2, y+-1). Under ell_inf both plans cost 2^p and both are
/// optimal; under the euclidean norm the shift plan wins.
struct LinftyReport {
  Coupling<double> plan_a;  // shift
  Coupling<double> plan_b;  // split
  double cost_a = 0;
  double cost_b = 0;
  double plan_distance = 0;  // total variation between the plan matrices
  bool optimal_a = false;
  bool optimal_b = false;
};

inline LinftyReport linfty_counterexample(int grid_n, double p, Norm norm = Norm::ell_inf) {
  if (grid_n < 2 || grid_n % 2 != 0) throw InvalidArgument("grid_n must be even and >= 2");
  CostSpec spec{p, norm, 2.0};
  validate_cost_spec(spec);
  const int n = grid_n, rows = 2 * grid_n;
  std::vector<Point<double>> src, dst;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rows; ++j) {
      const double x = (i + 0.5) / n, y = (j + 0.5) / n;
      src.push_back(Point<double>{std::vector<double>{x, y}});
      dst.push_back(Point<double>{std::vector<double>{x + 2.0, y}});
    }
  const DiscreteMeasure<double> mu = uniform_on(src);
  const DiscreteMeasure<double> nu = uniform_on(dst);
  const double w = 1.0 / (n * rows);
  const auto flat = [&](int i, int j) { return i * rows + j; };  // lex order of the grid

  LinftyReport report;
  report.plan_a = Coupling<double>{
      mu, nu, Matrix<double>(mu.size(), std::vector<double>(nu.size(), 0.0))};
  report.plan_b = report.plan_a;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rows; ++j) {
      const int swapped = j < n ? j + n : j - n;
      report.plan_a.matrix[flat(i, j)][flat(i, j)] += w;
      report.plan_b.matrix[flat(i, j)][flat(i, swapped)] += w;
    }
  report.cost_a = plan_cost(report.plan_a, spec);
  report.cost_b = plan_cost(report.plan_b, spec);
  report.plan_distance = to_double(tv_distance(report.plan_a, report.plan_b));
  const double tol = default_tolerances<double>().gap;
  report.optimal_a = inner::is_optimal(report.plan_a, spec, tol);
  report.optimal_b = inner::is_optimal(report.plan_b, spec, tol);
  return report;
}

/// Empirical uniqueness probe: re-solves the nested problem under seeded
/// cost tie-breaking perturbations and basis shuffles, and reports how far
/// the returned random couplings spread. "Consistent with uniqueness" is a
/// probe outcome, not a certificate.
struct UniquenessReport {
  bool consistent_with_uniqueness = false;
  double max_pairwise_distance = 0.0;
  double deterministic_fraction = 0.0;
  int runs = 0;
  bool hypotheses_met = false;
  std::string note;
};

namespace detail {

inline TransportSolution<double> solve_shuffled(const std::vector<double>& supply,
                                                const std::vector<double>& demand,
                                                const Matrix<double>& cost,
                                                std::mt19937_64& rng, double eta) {
  const std::size_t m = supply.size(), n = demand.size();
  std::vector<std::size_t> rho(m), tau(n);
  for (std::size_t i = 0; i < m; ++i) rho[i] = i;
  for (std::size_t j = 0; j < n; ++j) tau[j] = j;
  std::shuffle(rho.begin(), rho.end(), rng);
  std::shuffle(tau.begin(), tau.end(), rng);
  std::vector<double> ps(m), pd(n);
  Matrix<double> pc(m, std::vector<double>(n));
  for (std::size_t a = 0; a < m; ++a) ps[a] = supply[rho[a]];
  for (std::size_t b = 0; b < n; ++b) pd[b] = demand[tau[b]];
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b)
      pc[a][b] = cost[rho[a]][tau[b]] + eta * ((rng() >> 11) * 0x1.0p-53);
  TransportSolution<double> raw = solve_transport(ps, pd, pc);
  TransportSolution<double> out;
  out.plan.assign(m, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < n; ++b) out.plan[rho[a]][tau[b]] = raw.plan[a][b];
  out.iterations = raw.iterations;
  return out;
}

}  // namespace detail

inline UniquenessReport uniqueness_probe(const NestedMeasure<double>& M1,
                                         const NestedMeasure<double>& M2, const CostSpec& c,
                                         int perturbations, std::uint64_t seed,
                                         bool enforce_hypotheses = false) {
  validate_cost_spec(c);
  const bool hypotheses = c.strictly_convex_norm() && c.p > 1.0;
  if (enforce_hypotheses && !hypotheses)
    throw UnsupportedNorm("uniqueness requires a strictly convex norm and p > 1");
  require_canonical(M1, "uniqueness_probe");
  require_canonical(M2, "uniqueness_probe");

  const Tolerances<double> tol = default_tolerances<double>();
  std::mt19937_64 rng(seed);
  const std::size_t m = M1.size(), n = M2.size();

  // flattened run signature: outer mass times inner plan entry per
  // (outer cell, inner cell)
  std::vector<std::vector<double>> signatures;
  double det_hits = 0, det_total = 0;
  const int runs = std::max(1, perturbations);
  for (int r = 0; r < runs; ++r) {
    const bool baseline = r == 0;
    std::vector<Matrix<double>> plans(m * n);
    Matrix<double> outer_cost(m, std::vector<double>(n));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const Matrix<double> cm = cost_matrix(M1.atoms[i], M2.atoms[j], c);
        const double eta = baseline ? 0.0 : pivot_epsilon<double>(cm) * 10.0;
        const TransportSolution<double> sol =
            baseline ? solve_transport(M1.atoms[i].weights, M2.atoms[j].weights, cm)
                     : detail::solve_shuffled(M1.atoms[i].weights, M2.atoms[j].weights, cm,
                                              rng, eta);
        plans[i * n + j] = sol.plan;
        double exact = 0;
        for (std::size_t a = 0; a < cm.size(); ++a)
          for (std::size_t b = 0; b < cm[a].size(); ++b) exact += sol.plan[a][b] * cm[a][b];
        outer_cost[i][j] = exact;
      }
    const double eta_outer = baseline ? 0.0 : pivot_epsilon<double>(outer_cost) * 10.0;
    const TransportSolution<double> outer =
        baseline ? solve_transport(M1.weights, M2.weights, outer_cost)
                 : detail::solve_shuffled(M1.weights, M2.weights, outer_cost, rng, eta_outer);

    std::vector<double> signature;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double w = outer.plan[i][j];
        for (const auto& row : plans[i * n + j])
          for (double x : row) signature.push_back(w * x);
        if (w > 1e-14) {
          det_total += 1;
          Coupling<double> pi{M1.atoms[i], M2.atoms[j], plans[i * n + j]};
          if (is_deterministic(pi, tol.sum)) det_hits += 1;
        }
      }
    signatures.push_back(std::move(signature));
  }

  UniquenessReport report;
  report.runs = runs;
  report.hypotheses_met = hypotheses;
  for (std::size_t a = 0; a < signatures.size(); ++a)
    for (std::size_t b = a + 1; b < signatures.size(); ++b) {
      double d = 0;
      for (std::size_t k = 0; k < signatures[a].size(); ++k)
        d += std::fabs(signatures[a][k] - signatures[b][k]);
      report.max_pairwise_distance = std::max(report.max_pairwise_distance, 0.5 * d);
    }
  report.deterministic_fraction = det_total > 0 ? det_hits / det_total : 1.0;
  report.consistent_with_uniqueness =
      report.max_pairwise_distance <= 1e-9 && report.deterministic_fraction == 1.0;
  report.note = hypotheses
                    ? "consistent-with-uniqueness is a probe outcome, not a certificate"
                    : "norm is not strictly convex; uniqueness is not expected";
  return report;
}

}  // namespace monge

}  // namespace wow
