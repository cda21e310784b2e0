#pragma once

#include <utility>
#include <vector>

#include "wow/cost.hpp"
#include "wow/errors.hpp"
#include "wow/measure.hpp"

namespace wow {

/// Transport plan between two measures with atoms of type A. matrix[i][j]
/// carries the mass moved from source atom i to target atom j.
template <class A, class S>
struct CouplingT {
  Measure<A, S> source;
  Measure<A, S> target;
  Matrix<S> matrix;
};

template <class S>
using Coupling = CouplingT<Point<S>, S>;
template <class S>
using OuterCoupling = CouplingT<DiscreteMeasure<S>, S>;

/// Finitely supported law over transport plans.
template <class S>
struct RandomCoupling {
  std::vector<Coupling<S>> atoms;
  std::vector<S> weights;

  std::size_t size() const { return atoms.size(); }
};

enum class PotentialLevel { inner, outer };

/// Kantorovich potentials phi (source side) and psi (target side) with
/// phi_i + psi_j <= cost_ij.
template <class S>
struct DualPotentials {
  std::vector<S> phi;
  std::vector<S> psi;
  PotentialLevel level = PotentialLevel::inner;
};

template <class A, class S>
void validate_coupling(const CouplingT<A, S>& pi, const S& tol_sum) {
  const std::size_t m = pi.source.size(), n = pi.target.size();
  if (pi.matrix.size() != m) throw InvalidMeasure("plan row count mismatch");
  for (const auto& row : pi.matrix)
    if (row.size() != n) throw InvalidMeasure("plan column count mismatch");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (pi.matrix[i][j] < S(0) && abs_value(pi.matrix[i][j]) > tol_sum)
        throw InvalidMeasure("negative plan entry");
  for (std::size_t i = 0; i < m; ++i) {
    S row(0);
    for (std::size_t j = 0; j < n; ++j) row += pi.matrix[i][j];
    if (abs_value(row - pi.source.weights[i]) > tol_sum)
      throw MarginalMismatch("row sum differs from source weight");
  }
  for (std::size_t j = 0; j < n; ++j) {
    S col(0);
    for (std::size_t i = 0; i < m; ++i) col += pi.matrix[i][j];
    if (abs_value(col - pi.target.weights[j]) > tol_sum)
      throw MarginalMismatch("column sum differs from target weight");
  }
}

template <class S>
Matrix<S> cost_matrix(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                      const CostSpec& c) {
  if (dim(mu) != dim(nu)) throw DimMismatch("cost matrix between different dimensions");
  Matrix<S> m(mu.size(), std::vector<S>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      m[i][j] = ground_cost<S>(c, mu.atoms[i], nu.atoms[j]);
  return m;
}

/// <pi, c> = sum of plan entries times point costs.
template <class S>
S plan_cost(const Coupling<S>& pi, const CostSpec& c) {
  S total(0);
  for (std::size_t i = 0; i < pi.source.size(); ++i)
    for (std::size_t j = 0; j < pi.target.size(); ++j)
      if (pi.matrix[i][j] > S(0))
        total += pi.matrix[i][j] * ground_cost<S>(c, pi.source.atoms[i], pi.target.atoms[j]);
  return total;
}

template <class A, class S>
CouplingT<A, S> identity_plan(const Measure<A, S>& mu) {
  CouplingT<A, S> pi{mu, mu, Matrix<S>(mu.size(), std::vector<S>(mu.size(), S(0)))};
  for (std::size_t i = 0; i < mu.size(); ++i) pi.matrix[i][i] = mu.weights[i];
  return pi;
}

template <class A, class S>
CouplingT<A, S> product_plan(const Measure<A, S>& mu, const Measure<A, S>& nu) {
  CouplingT<A, S> pi{mu, nu, Matrix<S>(mu.size(), std::vector<S>(nu.size()))};
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      pi.matrix[i][j] = mu.weights[i] * nu.weights[j];
  return pi;
}

/// Total-variation distance between two plans on the same index grid.
template <class A, class S>
S tv_distance(const CouplingT<A, S>& a, const CouplingT<A, S>& b) {
  if (a.matrix.size() != b.matrix.size() ||
      (!a.matrix.empty() && a.matrix[0].size() != b.matrix[0].size()))
    throw DimMismatch("plan shapes differ");
  S d(0);
  for (std::size_t i = 0; i < a.matrix.size(); ++i)
    for (std::size_t j = 0; j < a.matrix[i].size(); ++j)
      d += abs_value(a.matrix[i][j] - b.matrix[i][j]);
  return d / S(2);
}

/// Three-way plan on X1 x X2 x X1' produced by gluing two couplings along
/// their shared second marginal. tensor[i][k][j] is the mass at
/// (source atom i, shared atom k, second-source atom j).
template <class S>
struct GluedPlan {
  DiscreteMeasure<S> first;
  DiscreteMeasure<S> shared;
  DiscreteMeasure<S> third;
  std::vector<Matrix<S>> tensor;  // indexed [i][k][j]

  Matrix<S> marginal_12() const {
    Matrix<S> m(first.size(), std::vector<S>(shared.size(), S(0)));
    for (std::size_t i = 0; i < first.size(); ++i)
      for (std::size_t k = 0; k < shared.size(); ++k)
        for (std::size_t j = 0; j < third.size(); ++j) m[i][k] += tensor[i][k][j];
    return m;
  }
  Matrix<S> marginal_32() const {
    Matrix<S> m(third.size(), std::vector<S>(shared.size(), S(0)));
    for (std::size_t i = 0; i < first.size(); ++i)
      for (std::size_t k = 0; k < shared.size(); ++k)
        for (std::size_t j = 0; j < third.size(); ++j) m[j][k] += tensor[i][k][j];
    return m;
  }
};

/// Conditional-independence gluing of pi in Gamma(mu1, nu) and pi2 in
/// Gamma(mu1', nu) along the shared nu: theta_{ikj} = pi_{ik} pi2_{jk} / nu_k.
template <class S>
GluedPlan<S> glue(const Coupling<S>& pi, const Coupling<S>& pi2, const S& tol = S(0)) {
  if (!measure_eq(pi.target, pi2.target, tol))
    throw MarginalMismatch("glue requires a shared target marginal");
  GluedPlan<S> theta;
  theta.first = pi.source;
  theta.shared = pi.target;
  theta.third = pi2.source;
  const std::size_t m = pi.source.size(), n = pi.target.size(), r = pi2.source.size();
  theta.tensor.assign(m, Matrix<S>(n, std::vector<S>(r, S(0))));
  for (std::size_t k = 0; k < n; ++k) {
    const S& nu_k = pi.target.weights[k];
    for (std::size_t i = 0; i < m; ++i) {
      if (!(pi.matrix[i][k] > S(0))) continue;
      for (std::size_t j = 0; j < r; ++j) {
        if (!(pi2.matrix[j][k] > S(0))) continue;
        theta.tensor[i][k][j] = pi.matrix[i][k] * pi2.matrix[j][k] / nu_k;
      }
    }
  }
  return theta;
}

/// First/second marginal measures of a plan, read off the stored marginals.
template <class S>
const DiscreteMeasure<S>& first_marginal(const Coupling<S>& pi) { return pi.source; }
template <class S>
const DiscreteMeasure<S>& second_marginal(const Coupling<S>& pi) { return pi.target; }

/// The law of the first (resp. second) marginal map under P, as a nested
/// measure: weight w_k sits at pr1_sharp(pi_k).
template <class S>
NestedMeasure<S> marginal_law(const RandomCoupling<S>& P, int which, const S& tol = S(0)) {
  NestedMeasure<S> law;
  for (std::size_t k = 0; k < P.size(); ++k) {
    law.atoms.push_back(which == 1 ? P.atoms[k].source : P.atoms[k].target);
    law.weights.push_back(P.weights[k]);
  }
  return canonicalize(law, tol);
}

/// Checks the double-pushforward constraint pr1_## P = M1, pr2_## P = M2.
template <class S>
bool validate_random_coupling(const RandomCoupling<S>& P, const NestedMeasure<S>& M1,
                              const NestedMeasure<S>& M2, const S& tol) {
  if (P.size() == 0 || P.size() != P.weights.size()) return false;
  try {
    return measure_eq(marginal_law(P, 1, tol), M1, tol) &&
           measure_eq(marginal_law(P, 2, tol), M2, tol);
  } catch (const DimMismatch&) {
    return false;
  }
}

/// The induced outer coupling Pi = (pr1_sharp, pr2_sharp)_sharp P between the
/// distinct marginal measures of P's atoms.
template <class S>
OuterCoupling<S> induced_outer_coupling(const RandomCoupling<S>& P, const S& tol = S(0)) {
  if (P.size() == 0) throw EmptyMeasure("empty random coupling");
  const NestedMeasure<S> law1 = marginal_law(P, 1, tol);
  const NestedMeasure<S> law2 = marginal_law(P, 2, tol);
  OuterCoupling<S> outer{law1, law2,
                         Matrix<S>(law1.size(), std::vector<S>(law2.size(), S(0)))};
  for (std::size_t k = 0; k < P.size(); ++k) {
    const int i = find_atom_index(law1, P.atoms[k].source, tol);
    const int j = find_atom_index(law2, P.atoms[k].target, tol);
    if (i < 0 || j < 0) throw IndexMismatch("marginal not found in induced law");
    outer.matrix[i][j] += P.weights[k];
  }
  return outer;
}

}  // namespace wow
