#pragma once

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

#include "wow/coupling.hpp"
#include "wow/transport.hpp"

namespace wow {

/// Solution of the discrete transportation problem realizing the inner cost
/// C(mu, nu) = min over plans of <pi, c>.
template <class S>
struct InnerSolution {
  S cost;
  Coupling<S> plan;
  DualPotentials<S> duals;
  int iterations = 0;
};

namespace inner {

/// Exact solver; the returned plan is a vertex of the transportation polytope
/// (at most m+n-1 support cells) and the duals close the gap.
template <class S>
InnerSolution<S> solve(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                       const CostSpec& c) {
  validate_cost_spec(c);
  const Matrix<S> cm = cost_matrix(mu, nu, c);
  TransportSolution<S> raw = solve_transport(mu.weights, nu.weights, cm);
  InnerSolution<S> out;
  out.cost = raw.cost;
  out.plan = Coupling<S>{mu, nu, std::move(raw.plan)};
  out.duals = DualPotentials<S>{std::move(raw.u), std::move(raw.v), PotentialLevel::inner};
  out.iterations = raw.iterations;
  return out;
}

namespace detail1d {

// Support chain of the monotone coupling, grouped into connected components
// (zero-mass bridge cells split components).
template <class S>
struct Chain {
  std::vector<std::tuple<int, int, S>> cells;  // positive cells, monotone order
  std::vector<std::size_t> component;          // component id per cell
};

template <class S>
Chain<S> monotone_chain(const std::vector<S>& a, const std::vector<S>& b) {
  Chain<S> chain;
  const int m = static_cast<int>(a.size()), n = static_cast<int>(b.size());
  std::vector<S> ra = a, rb = b;
  int i = 0, j = 0;
  int prev_i = -1, prev_j = -1;
  std::size_t comp = 0;
  bool first = true;
  while (true) {
    const S x = std::min(ra[i], rb[j]);
    if (x > S(0)) {
      if (!first && i != prev_i && j != prev_j) ++comp;
      chain.cells.emplace_back(i, j, x);
      chain.component.push_back(comp);
      prev_i = i;
      prev_j = j;
      first = false;
    }
    ra[i] -= x;
    rb[j] -= x;
    if (i == m - 1 && j == n - 1) break;
    if (i == m - 1) ++j;
    else if (j == n - 1) ++i;
    else if (!(ra[i] > rb[j])) ++i;
    else ++j;
  }
  return chain;
}

}  // namespace detail1d

/// Monotone (quantile) coupling for one-dimensional marginals, built by a CDF
/// sweep. Optimal for every convex cost |x-y|^p with p >= 1; duals are
/// recovered from the support chain with a difference-constraint solve, so
/// the routine never touches the simplex path.
template <class S>
InnerSolution<S> solve_1d_monotone(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                                   const CostSpec& c) {
  validate_cost_spec(c);
  if (dim(mu) != 1 || dim(nu) != 1) throw DimNotOne("solve_1d_monotone requires dimension one");
  require_canonical(mu, "solve_1d_monotone");
  require_canonical(nu, "solve_1d_monotone");

  const Matrix<S> cm = cost_matrix(mu, nu, c);
  const auto chain = detail1d::monotone_chain<S>(mu.weights, nu.weights);
  const std::size_t m = mu.size(), n = nu.size();

  InnerSolution<S> out;
  out.plan = Coupling<S>{mu, nu, Matrix<S>(m, std::vector<S>(n, S(0)))};
  out.cost = S(0);
  for (const auto& [i, j, x] : chain.cells) {
    out.plan.matrix[i][j] += x;
    out.cost += x * cm[i][j];
  }

  // potentials per component, tight on the support chain
  const std::size_t comps = chain.cells.empty() ? 0 : chain.component.back() + 1;
  std::vector<S> phi(m, S(0)), psi(n, S(0));
  std::vector<int> row_comp(m, -1), col_comp(n, -1);
  {
    int prev_i = -1, prev_j = -1;
    for (std::size_t k = 0; k < chain.cells.size(); ++k) {
      const auto& [i, j, x] = chain.cells[k];
      const bool fresh = k == 0 || chain.component[k] != chain.component[k - 1];
      if (fresh) {
        phi[i] = S(0);
        psi[j] = cm[i][j];
      } else if (i == prev_i) {
        psi[j] = cm[i][j] - phi[i];
      } else {
        phi[i] = cm[i][j] - psi[j];
      }
      row_comp[i] = static_cast<int>(chain.component[k]);
      col_comp[j] = static_cast<int>(chain.component[k]);
      prev_i = i;
      prev_j = j;
    }
  }

  if (comps > 1) {
    // gamma_s - gamma_t <= min over (i in rows(s), j in cols(t)) of
    // c_ij - phi_i - psi_j; Bellman-Ford over components
    std::vector<std::vector<S>> w(comps, std::vector<S>(comps));
    std::vector<std::vector<char>> has(comps, std::vector<char>(comps, 0));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const int s = row_comp[i], t = col_comp[j];
        if (s < 0 || t < 0 || s == t) continue;
        const S slack = cm[i][j] - phi[i] - psi[j];
        if (!has[s][t] || slack < w[s][t]) {
          w[s][t] = slack;
          has[s][t] = 1;
        }
      }
    std::vector<S> gamma(comps, S(0));
    for (std::size_t pass = 0; pass <= comps; ++pass) {
      bool changed = false;
      for (std::size_t s = 0; s < comps; ++s)
        for (std::size_t t = 0; t < comps; ++t)
          if (s != t && has[s][t] && gamma[s] > gamma[t] + w[s][t]) {
            gamma[s] = gamma[t] + w[s][t];
            changed = true;
          }
      if (!changed) break;
      if (pass == comps) throw NumericalFailure("monotone duals: negative cycle");
    }
    for (std::size_t i = 0; i < m; ++i) phi[i] += gamma[row_comp[i]];
    for (std::size_t j = 0; j < n; ++j) psi[j] -= gamma[col_comp[j]];
  }

  const S shift = psi[0];
  for (S& x : phi) x += shift;
  for (S& x : psi) x -= shift;
  out.duals = DualPotentials<S>{std::move(phi), std::move(psi), PotentialLevel::inner};
  return out;
}

/// True iff <pi, c> matches the optimal transport value within tol.
template <class S>
bool is_optimal(const Coupling<S>& pi, const CostSpec& c, const S& tol) {
  return !(plan_cost(pi, c) > solve(pi.source, pi.target, c).cost + tol);
}

}  // namespace inner

/// W_p(mu, nu) as a double.
template <class S>
double wasserstein(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
                   const CostSpec& c) {
  return std::pow(to_double(inner::solve(mu, nu, c).cost), 1.0 / c.p);
}

}  // namespace wow
