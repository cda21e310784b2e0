#pragma once

#include <algorithm>
#include <queue>
#include <utility>
#include <vector>

#include "wow/cost.hpp"
#include "wow/errors.hpp"
#include "wow/scalar.hpp"

namespace wow {

/// Raw solution of a balanced transportation problem. The duals satisfy
/// u_i + v_j <= c_ij everywhere, with equality on the final basis, and are
/// normalized so that v[0] = 0.
template <class S>
struct TransportSolution {
  Matrix<S> plan;
  std::vector<S> u;
  std::vector<S> v;
  S cost;
  int iterations = 0;
};

template <class S>
S pivot_epsilon(const Matrix<S>& cost);

template <>
inline double pivot_epsilon<double>(const Matrix<double>& cost) {
  double scale = 1.0;
  for (const auto& row : cost)
    for (double c : row) scale = std::max(scale, std::fabs(c));
  return 1e-13 * scale;
}

template <>
inline Rational pivot_epsilon<Rational>(const Matrix<Rational>&) {
  return Rational(0);
}

namespace detail {

// Dual values from the spanning-tree basis: u_i + v_j = c_ij on basic arcs,
// anchored at u[0] = 0.
template <class S>
void tree_duals(int m, int n, const Matrix<S>& cost,
                const std::vector<std::pair<int, int>>& basis, std::vector<S>& u,
                std::vector<S>& v) {
  const int nodes = m + n;
  std::vector<std::vector<int>> adj(nodes);
  for (int b = 0; b < static_cast<int>(basis.size()); ++b) {
    adj[basis[b].first].push_back(b);
    adj[m + basis[b].second].push_back(b);
  }
  std::vector<char> known(nodes, 0);
  u.assign(m, S(0));
  v.assign(n, S(0));
  std::queue<int> frontier;
  known[0] = 1;
  frontier.push(0);
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop();
    for (int b : adj[node]) {
      const int i = basis[b].first, j = basis[b].second;
      if (node < m && !known[m + j]) {
        v[j] = cost[i][j] - u[i];
        known[m + j] = 1;
        frontier.push(m + j);
      } else if (node >= m && !known[i]) {
        u[i] = cost[i][j] - v[j];
        known[i] = 1;
        frontier.push(i);
      }
    }
  }
}

// Unique tree path between source node i0 and sink node (m + j0), as a node
// sequence. The basis is a spanning tree, so the path exists.
template <class S>
std::vector<int> tree_path(int m, int n, const std::vector<std::pair<int, int>>& basis,
                           int from, int to) {
  const int nodes = m + n;
  std::vector<std::vector<int>> adj(nodes);
  for (const auto& [i, j] : basis) {
    adj[i].push_back(m + j);
    adj[m + j].push_back(i);
  }
  std::vector<int> parent(nodes, -2);
  std::queue<int> frontier;
  parent[from] = -1;
  frontier.push(from);
  while (!frontier.empty()) {
    const int node = frontier.front();
    frontier.pop();
    if (node == to) break;
    for (int next : adj[node])
      if (parent[next] == -2) {
        parent[next] = node;
        frontier.push(next);
      }
  }
  if (parent[to] == -2) throw NumericalFailure("basis lost tree connectivity");
  std::vector<int> path;
  for (int node = to; node != -1; node = parent[node]) path.push_back(node);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace detail

/// Exact primal network simplex for the balanced transportation problem.
/// Initial basis is the northwest-corner tree; pivoting follows Bland's rule
/// (lowest row-major index entering, lowest-index leaving among ties), which
/// prevents cycling under degeneracy.
template <class S>
TransportSolution<S> solve_transport(const std::vector<S>& supply,
                                     const std::vector<S>& demand, const Matrix<S>& cost,
                                     long max_iterations = -1) {
  const int m = static_cast<int>(supply.size());
  const int n = static_cast<int>(demand.size());
  if (m == 0 || n == 0) throw EmptyMeasure("transport with empty marginal");
  if (static_cast<int>(cost.size()) != m) throw DimMismatch("cost matrix row count");
  for (const auto& row : cost)
    if (static_cast<int>(row.size()) != n) throw DimMismatch("cost matrix column count");
  for (const S& a : supply)
    if (a < S(0)) throw InvalidMeasure("negative supply");
  for (const S& b : demand)
    if (b < S(0)) throw InvalidMeasure("negative demand");
  if (max_iterations < 0) max_iterations = 20000 + 20L * m * n;

  TransportSolution<S> out;
  out.plan.assign(m, std::vector<S>(n, S(0)));
  std::vector<std::pair<int, int>> basis;
  std::vector<std::vector<char>> in_basis(m, std::vector<char>(n, 0));

  // northwest-corner start
  {
    std::vector<S> ra = supply, rb = demand;
    int i = 0, j = 0;
    while (true) {
      const S x = std::min(ra[i], rb[j]);
      out.plan[i][j] = x;
      basis.emplace_back(i, j);
      in_basis[i][j] = 1;
      ra[i] -= x;
      rb[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      if (i == m - 1) ++j;
      else if (j == n - 1) ++i;
      else if (!(ra[i] > rb[j])) ++i;
      else ++j;
    }
  }

  const S eps = pivot_epsilon<S>(cost);
  std::vector<S> u, v;
  while (true) {
    detail::tree_duals(m, n, cost, basis, u, v);

    int ei = -1, ej = -1;
    for (int i = 0; i < m && ei < 0; ++i)
      for (int j = 0; j < n; ++j) {
        if (in_basis[i][j]) continue;
        if (cost[i][j] - u[i] - v[j] < -eps) {
          ei = i;
          ej = j;
          break;
        }
      }
    if (ei < 0) break;

    if (++out.iterations > max_iterations)
      throw NumericalFailure("transport pivot limit exceeded");

    const std::vector<int> path = detail::tree_path<S>(m, n, basis, ei, m + ej);
    // path arcs alternate sign along the cycle; arc 0 (sharing row ei with the
    // entering cell) carries flow out
    std::vector<std::pair<int, int>> minus_cells, plus_cells;
    for (std::size_t t = 0; t + 1 < path.size(); ++t) {
      const int a = path[t], b = path[t + 1];
      const int i = a < m ? a : b;
      const int j = (a < m ? b : a) - m;
      if (t % 2 == 0) minus_cells.emplace_back(i, j);
      else plus_cells.emplace_back(i, j);
    }

    S delta = out.plan[minus_cells[0].first][minus_cells[0].second];
    for (const auto& [i, j] : minus_cells) delta = std::min(delta, out.plan[i][j]);
    std::pair<int, int> leaving = minus_cells[0];
    bool leaving_set = false;
    for (const auto& cell : minus_cells)
      if (!(out.plan[cell.first][cell.second] > delta)) {
        if (!leaving_set || cell < leaving) leaving = cell;
        leaving_set = true;
      }

    out.plan[ei][ej] += delta;
    for (const auto& [i, j] : plus_cells) out.plan[i][j] += delta;
    for (const auto& [i, j] : minus_cells) {
      out.plan[i][j] -= delta;
      if constexpr (!is_exact_v<S>) {
        if (out.plan[i][j] < S(0)) out.plan[i][j] = S(0);
      }
    }

    in_basis[leaving.first][leaving.second] = 0;
    basis.erase(std::find(basis.begin(), basis.end(), leaving));
    basis.emplace_back(ei, ej);
    in_basis[ei][ej] = 1;
  }

  detail::tree_duals(m, n, cost, basis, u, v);
  const S shift = v[0];
  out.u = std::move(u);
  out.v = std::move(v);
  for (S& ui : out.u) ui += shift;
  for (S& vj : out.v) vj -= shift;

  out.cost = S(0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      if (out.plan[i][j] > S(0)) out.cost += out.plan[i][j] * cost[i][j];
  return out;
}

}  // namespace wow
