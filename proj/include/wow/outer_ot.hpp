#pragma once

#include <map>
#include <thread>
#include <utility>
#include <vector>

#include "wow/inner_ot.hpp"

namespace wow {

/// Table of inner solutions for all atom pairs of two nested measures.
/// Identical (mu, nu) pairs are solved once and shared.
template <class S>
struct InnerTable {
  std::vector<InnerSolution<S>> solutions;      // one per distinct pair
  std::vector<std::vector<int>> index;          // (i,j) -> slot in solutions

  const InnerSolution<S>& at(std::size_t i, std::size_t j) const {
    return solutions[index[i][j]];
  }
  Matrix<S> costs() const {
    Matrix<S> c(index.size(), std::vector<S>(index.empty() ? 0 : index[0].size()));
    for (std::size_t i = 0; i < index.size(); ++i)
      for (std::size_t j = 0; j < index[i].size(); ++j) c[i][j] = at(i, j).cost;
    return c;
  }
};

namespace detail {

template <class S>
struct MeasurePairLess {
  bool operator()(const std::pair<const DiscreteMeasure<S>*, const DiscreteMeasure<S>*>& a,
                  const std::pair<const DiscreteMeasure<S>*, const DiscreteMeasure<S>*>& b) const {
    if (atom_less(*a.first, *b.first)) return true;
    if (atom_less(*b.first, *a.first)) return false;
    return atom_less(*a.second, *b.second);
  }
};

}  // namespace detail

/// Solves the inner problem for every atom pair, dedupes identical pairs, and
/// evaluates distinct pairs concurrently when jobs > 1.
template <class S>
InnerTable<S> inner_table(const NestedMeasure<S>& M1, const NestedMeasure<S>& M2,
                          const CostSpec& c, int jobs = 1) {
  InnerTable<S> table;
  const std::size_t m = M1.size(), n = M2.size();
  table.index.assign(m, std::vector<int>(n, -1));
  std::map<std::pair<const DiscreteMeasure<S>*, const DiscreteMeasure<S>*>, int,
           detail::MeasurePairLess<S>>
      slot_of;
  std::vector<std::pair<std::size_t, std::size_t>> representative;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const auto key = std::make_pair(&M1.atoms[i], &M2.atoms[j]);
      auto [it, inserted] = slot_of.emplace(key, static_cast<int>(representative.size()));
      if (inserted) representative.emplace_back(i, j);
      table.index[i][j] = it->second;
    }

  table.solutions.resize(representative.size());
  const auto solve_slot = [&](std::size_t s) {
    const auto& [i, j] = representative[s];
    table.solutions[s] = inner::solve(M1.atoms[i], M2.atoms[j], c);
  };
  if (jobs <= 1 || representative.size() <= 1) {
    for (std::size_t s = 0; s < representative.size(); ++s) solve_slot(s);
  } else {
    const std::size_t workers =
        std::min<std::size_t>(jobs, std::max<std::size_t>(1, representative.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t s = w; s < representative.size(); s += workers) solve_slot(s);
      });
    for (auto& t : pool) t.join();
  }
  return table;
}

/// Entry (i,j) = C(atom_i of M1, atom_j of M2).
template <class S>
Matrix<S> outer_cost_matrix(const NestedMeasure<S>& M1, const NestedMeasure<S>& M2,
                            const CostSpec& c, int jobs = 1) {
  require_canonical(M1, "outer_cost_matrix");
  require_canonical(M2, "outer_cost_matrix");
  if (dim(M1.atoms.front()) != dim(M2.atoms.front()))
    throw DimMismatch("nested measures of different dimension");
  return inner_table(M1, M2, c, jobs).costs();
}

/// Full solution of the nested problem: the outer plan Pi, its duals, and the
/// optimal random coupling P = sum over support cells of Pi_{ij} times a
/// Dirac at the deterministic optimal inner plan (the selection map G).
template <class S>
struct NestedSolution {
  S cost;
  OuterCoupling<S> outer_plan;
  DualPotentials<S> outer_duals;
  RandomCoupling<S> random_coupling;
  std::vector<std::pair<int, int>> coupling_cells;  // (i,j) per random-coupling atom
  InnerTable<S> inner;
  int iterations = 0;
};

template <class S>
S support_cutoff() { return S(0); }
template <>
inline double support_cutoff<double>() { return 1e-14; }

template <class S>
NestedSolution<S> solve_nested(const NestedMeasure<S>& M1, const NestedMeasure<S>& M2,
                               const CostSpec& c, int jobs = 1) {
  require_canonical(M1, "solve_nested");
  require_canonical(M2, "solve_nested");
  if (dim(M1.atoms.front()) != dim(M2.atoms.front()))
    throw DimMismatch("nested measures of different dimension");
  validate_cost_spec(c);

  NestedSolution<S> out;
  out.inner = inner_table(M1, M2, c, jobs);
  const Matrix<S> costs = out.inner.costs();
  TransportSolution<S> raw = solve_transport(M1.weights, M2.weights, costs);
  out.cost = raw.cost;
  out.iterations = raw.iterations;
  out.outer_plan = OuterCoupling<S>{M1, M2, std::move(raw.plan)};
  out.outer_duals = DualPotentials<S>{std::move(raw.u), std::move(raw.v), PotentialLevel::outer};

  const S cutoff = support_cutoff<S>();
  for (std::size_t i = 0; i < M1.size(); ++i)
    for (std::size_t j = 0; j < M2.size(); ++j) {
      const S& w = out.outer_plan.matrix[i][j];
      if (w > cutoff) {
        out.random_coupling.atoms.push_back(out.inner.at(i, j).plan);
        out.random_coupling.weights.push_back(w);
        out.coupling_cells.emplace_back(static_cast<int>(i), static_cast<int>(j));
      }
    }
  return out;
}

/// Objective of the random-coupling formulation: sum_k w_k <pi_k, c>.
template <class S>
S random_coupling_cost(const RandomCoupling<S>& P, const CostSpec& c) {
  S total(0);
  for (std::size_t k = 0; k < P.size(); ++k) total += P.weights[k] * plan_cost(P.atoms[k], c);
  return total;
}

/// Both sides of the marginal inequality: lhs integrates the inner optimal
/// cost against the induced outer coupling, rhs is the random-coupling
/// objective. lhs <= rhs always; equality holds exactly when every atom is an
/// optimal plan between its own marginals.
template <class S>
struct Eq71Report {
  S lhs;
  S rhs;
  S gap;
  bool inequality_ok;
  bool equality;
};

template <class S>
Eq71Report<S> verify_eq71(const RandomCoupling<S>& P, const CostSpec& c, const S& tol) {
  Eq71Report<S> report{};
  report.rhs = random_coupling_cost(P, c);
  const OuterCoupling<S> outer = induced_outer_coupling(P, tol);
  report.lhs = S(0);
  for (std::size_t i = 0; i < outer.source.size(); ++i)
    for (std::size_t j = 0; j < outer.target.size(); ++j)
      if (outer.matrix[i][j] > S(0))
        report.lhs += outer.matrix[i][j] *
                      inner::solve(outer.source.atoms[i], outer.target.atoms[j], c).cost;
  report.gap = report.rhs - report.lhs;
  report.inequality_ok = !(report.lhs > report.rhs + tol);
  report.equality = true;
  for (std::size_t k = 0; k < P.size(); ++k)
    if (!inner::is_optimal(P.atoms[k], c, tol)) {
      report.equality = false;
      break;
    }
  return report;
}

/// Nested Wasserstein distance W_p over W_p as a double.
template <class S>
double nested_wasserstein(const NestedMeasure<S>& M1, const NestedMeasure<S>& M2,
                          const CostSpec& c, int jobs = 1) {
  return std::pow(to_double(solve_nested(M1, M2, c, jobs).cost), 1.0 / c.p);
}

}  // namespace wow
