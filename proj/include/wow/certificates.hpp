#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "wow/outer_ot.hpp"

namespace wow {

template <class S>
struct CycleWitness {
  std::vector<int> cycle;  // pair indices, in cycle order
  S shifted;               // sum of C(first_i, second_{i-1})
  S diagonal;              // sum of C(first_i, second_i)
};

template <class S>
struct MonotoneReport {
  bool passed = true;
  std::optional<CycleWitness<S>> witness;
  long cycles_checked = 0;
  bool exhaustive = true;
  std::string note;
};

namespace cert {

namespace detail {

template <class S>
struct PairCostTable {
  std::vector<DiscreteMeasure<S>> firsts;
  std::vector<DiscreteMeasure<S>> seconds;
  std::vector<int> pair_first;
  std::vector<int> pair_second;
  Matrix<S> cost;  // firsts x seconds, inner optimal values
};

template <class S>
int dedup_insert(std::vector<DiscreteMeasure<S>>& pool, const DiscreteMeasure<S>& mu) {
  for (std::size_t k = 0; k < pool.size(); ++k)
    if (measure_eq(pool[k], mu, S(0))) return static_cast<int>(k);
  pool.push_back(mu);
  return static_cast<int>(pool.size() - 1);
}

template <class S>
PairCostTable<S> pair_cost_table(
    const std::vector<std::pair<DiscreteMeasure<S>, DiscreteMeasure<S>>>& pairs,
    const CostSpec& c) {
  PairCostTable<S> t;
  for (const auto& [mu, nu] : pairs) {
    t.pair_first.push_back(dedup_insert(t.firsts, mu));
    t.pair_second.push_back(dedup_insert(t.seconds, nu));
  }
  t.cost.assign(t.firsts.size(), std::vector<S>(t.seconds.size()));
  for (std::size_t a = 0; a < t.firsts.size(); ++a)
    for (std::size_t b = 0; b < t.seconds.size(); ++b)
      t.cost[a][b] = inner::solve(t.firsts[a], t.seconds[b], c).cost;
  return t;
}

}  // namespace detail

/// Checks C-cyclical monotonicity at measure level over cycles of length
/// <= max_cycle drawn from `pairs` with repetition: the shifted sum must
/// dominate the diagonal sum on every cycle. Up to eight pairs the search is
/// exhaustive; beyond that (or past the budget) it samples random cycles and
/// a pass is only a non-falsification.
template <class S>
MonotoneReport<S> check_c_cyclical_monotone(
    const std::vector<std::pair<DiscreteMeasure<S>, DiscreteMeasure<S>>>& pairs,
    const CostSpec& c, int max_cycle, const S& tol, long budget = 2000000,
    std::uint64_t seed = 0) {
  MonotoneReport<S> report;
  if (pairs.empty()) {
    report.note = "no pairs";
    return report;
  }
  const auto table = detail::pair_cost_table(pairs, c);
  const auto C = [&](int s, int t) -> const S& {
    return table.cost[table.pair_first[s]][table.pair_second[t]];
  };
  const int P = static_cast<int>(pairs.size());

  const auto check_tuple = [&](const std::vector<int>& tuple) {
    ++report.cycles_checked;
    const int k = static_cast<int>(tuple.size());
    S diagonal(0), shifted(0);
    for (int t = 0; t < k; ++t) {
      diagonal += C(tuple[t], tuple[t]);
      shifted += C(tuple[t], tuple[(t + k - 1) % k]);
    }
    if (shifted < diagonal - tol) {
      report.passed = false;
      report.witness = CycleWitness<S>{tuple, shifted, diagonal};
      return false;
    }
    return true;
  };

  long projected = 0;
  for (int k = 2; k <= max_cycle; ++k) {
    long tuples = 1;
    for (int t = 0; t < k && tuples <= budget; ++t) tuples *= P;
    projected += tuples;
    if (projected > budget) break;
  }
  if (P <= 8 && projected <= budget) {
    std::vector<int> tuple;
    // depth-first enumeration; the first entry is kept minimal, which picks
    // one representative per rotation class
    const std::function<bool(int)> extend = [&](int k) -> bool {
      if (static_cast<int>(tuple.size()) == k) return check_tuple(tuple);
      for (int idx = tuple.empty() ? 0 : tuple.front(); idx < P; ++idx) {
        tuple.push_back(idx);
        const bool keep_going = extend(k);
        tuple.pop_back();
        if (!keep_going) return false;
      }
      return true;
    };
    for (int k = 2; k <= max_cycle && report.passed; ++k) {
      tuple.clear();
      extend(k);
    }
    return report;
  }

  report.exhaustive = false;
  report.note = "randomized cycle search; a pass is a non-falsification, not a proof";
  std::mt19937_64 rng(seed);
  const long samples = std::min<long>(budget, 20000);
  for (long s = 0; s < samples && report.passed; ++s) {
    const int k = 2 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_cycle - 1));
    std::vector<int> tuple(k);
    for (int t = 0; t < k; ++t) tuple[t] = static_cast<int>(rng() % P);
    check_tuple(tuple);
  }
  return report;
}

/// Report for the total C-cyclical monotonicity test of a family of plans:
/// clause (a) is inner optimality of every plan, clause (b) is measure-level
/// cyclical monotonicity of the marginal pairs.
template <class S>
struct TotalMonotoneReport {
  bool passed = true;
  char failed_clause = 0;  // 'a' or 'b'
  int atom_index = -1;     // offending plan for clause (a)
  MonotoneReport<S> marginal_report;
};

template <class S>
TotalMonotoneReport<S> check_total_monotone(const std::vector<Coupling<S>>& F,
                                            const CostSpec& c, int max_cycle, const S& tol) {
  TotalMonotoneReport<S> report;
  for (std::size_t k = 0; k < F.size(); ++k)
    if (!inner::is_optimal(F[k], c, tol)) {
      report.passed = false;
      report.failed_clause = 'a';
      report.atom_index = static_cast<int>(k);
      return report;
    }
  std::vector<std::pair<DiscreteMeasure<S>, DiscreteMeasure<S>>> pairs;
  pairs.reserve(F.size());
  for (const auto& pi : F) pairs.emplace_back(pi.source, pi.target);
  report.marginal_report = check_c_cyclical_monotone(pairs, c, max_cycle, tol);
  if (!report.marginal_report.passed) {
    report.passed = false;
    report.failed_clause = 'b';
  }
  return report;
}

// ---- direct sampling of the defining condition -----------------------------

template <class S>
struct SampledWitness {
  std::vector<int> atom_indices;  // plan index per slot
  std::vector<int> sigma;
  S diagonal;
  S permuted;
  std::string generator;
};

template <class S>
struct SampledReport {
  bool falsified = false;
  std::optional<SampledWitness<S>> witness;
  long comparisons = 0;
  std::string note =
      "passed means non-falsification on sampled gluings, not a proof of monotonicity";
};

namespace detail {

// A finitely supported law on (X1 x X2)^N: each atom stores one support cell
// per slot, referring to the slot's plan.
template <class S>
struct Theta {
  std::vector<int> plan_of_slot;
  std::vector<std::pair<S, std::vector<std::pair<int, int>>>> atoms;  // (weight, cells)
};

template <class S>
Theta<S> product_gluing(const std::vector<Coupling<S>>& F, const std::vector<int>& picks,
                        std::size_t atom_cap) {
  Theta<S> theta;
  theta.plan_of_slot = picks;
  theta.atoms.push_back({S(1), {}});
  for (int k : picks) {
    std::vector<std::pair<S, std::vector<std::pair<int, int>>>> next;
    for (const auto& [w, cells] : theta.atoms)
      for (std::size_t i = 0; i < F[k].source.size(); ++i)
        for (std::size_t j = 0; j < F[k].target.size(); ++j) {
          if (!(F[k].matrix[i][j] > S(0))) continue;
          auto extended = cells;
          extended.emplace_back(static_cast<int>(i), static_cast<int>(j));
          next.push_back({w * F[k].matrix[i][j], std::move(extended)});
          if (next.size() > atom_cap) throw BudgetExceeded("theta atom cap");
        }
    theta.atoms = std::move(next);
  }
  return theta;
}

// Markov-chain gluing: consecutive slots are linked by a transport plan
// between the previous target marginal and the next source marginal. This is
// the chained-gluing structure used to prove the monotonicity propositions.
template <class S>
Theta<S> chained_gluing(const std::vector<Coupling<S>>& F, const std::vector<int>& picks,
                        const CostSpec& c, std::size_t atom_cap) {
  Theta<S> theta;
  theta.plan_of_slot = picks;
  const Coupling<S>& head = F[picks.front()];
  for (std::size_t i = 0; i < head.source.size(); ++i)
    for (std::size_t j = 0; j < head.target.size(); ++j)
      if (head.matrix[i][j] > S(0))
        theta.atoms.push_back(
            {head.matrix[i][j], {{static_cast<int>(i), static_cast<int>(j)}}});

  for (std::size_t t = 1; t < picks.size(); ++t) {
    const Coupling<S>& prev = F[picks[t - 1]];
    const Coupling<S>& next = F[picks[t]];
    const Coupling<S> link = inner::solve(prev.target, next.source, c).plan;
    std::vector<std::pair<S, std::vector<std::pair<int, int>>>> extended;
    for (const auto& [w, cells] : theta.atoms) {
      const int j_prev = cells.back().second;
      for (std::size_t i = 0; i < next.source.size(); ++i) {
        if (!(link.matrix[j_prev][i] > S(0))) continue;
        const S through = w * link.matrix[j_prev][i] / prev.target.weights[j_prev];
        for (std::size_t j = 0; j < next.target.size(); ++j) {
          if (!(next.matrix[i][j] > S(0))) continue;
          auto path = cells;
          path.emplace_back(static_cast<int>(i), static_cast<int>(j));
          extended.push_back(
              {through * next.matrix[i][j] / next.source.weights[i], std::move(path)});
          if (extended.size() > atom_cap) throw BudgetExceeded("theta atom cap");
        }
      }
    }
    theta.atoms = std::move(extended);
  }
  return theta;
}

template <class S>
S theta_assignment_cost(const std::vector<Coupling<S>>& F, const Theta<S>& theta,
                        const std::vector<int>& sigma, const CostSpec& c) {
  S total(0);
  for (const auto& [w, cells] : theta.atoms) {
    for (std::size_t t = 0; t < cells.size(); ++t) {
      const Coupling<S>& own = F[theta.plan_of_slot[t]];
      const Coupling<S>& other = F[theta.plan_of_slot[sigma[t]]];
      const Point<S>& x1 = own.source.atoms[cells[t].first];
      const Point<S>& x2 = other.target.atoms[cells[sigma[t]].second];
      total += w * ground_cost<S>(c, x1, x2);
    }
  }
  return total;
}

}  // namespace detail

/// Samples gluings theta whose slot marginals lie in F (independent products
/// and chained gluings) together with permutations, and searches for a
/// violation of the defining inequality of total C-cyclical monotonicity.
/// A pass is only a non-falsification.
template <class S>
SampledReport<S> falsify_total_monotone_sampled(const std::vector<Coupling<S>>& F,
                                                const CostSpec& c, int N, int samples,
                                                std::uint64_t seed, const S& tol) {
  SampledReport<S> report;
  if (F.empty() || N < 1) return report;
  if (N > 4) throw BudgetExceeded("sampled falsification supports N <= 4");
  std::mt19937_64 rng(seed);
  constexpr std::size_t kAtomCap = 50000;

  std::vector<int> identity(N);
  for (int t = 0; t < N; ++t) identity[t] = t;
  std::vector<std::vector<int>> permutations;
  {
    std::vector<int> perm = identity;
    do {
      permutations.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  for (int s = 0; s < samples && !report.falsified; ++s) {
    std::vector<int> picks(N);
    for (int t = 0; t < N; ++t) picks[t] = static_cast<int>(rng() % F.size());
    const bool chained = (rng() & 1u) != 0;
    detail::Theta<S> theta;
    std::string generator = chained ? "chained" : "product";
    try {
      theta = chained ? detail::chained_gluing(F, picks, c, kAtomCap)
                      : detail::product_gluing(F, picks, kAtomCap);
    } catch (const BudgetExceeded&) {
      theta = detail::product_gluing(F, picks, kAtomCap);
      generator = "product";
    }
    const S diagonal = detail::theta_assignment_cost(F, theta, identity, c);
    for (const auto& sigma : permutations) {
      ++report.comparisons;
      const S permuted = detail::theta_assignment_cost(F, theta, sigma, c);
      if (permuted < diagonal - tol) {
        report.falsified = true;
        report.witness = SampledWitness<S>{picks, sigma, diagonal, permuted, generator};
        break;
      }
    }
  }
  return report;
}

// ---- potential certificates -------------------------------------------------

template <class S>
struct SuperdiffAtomCheck {
  int source_index;
  int target_index;
  S potential_sum;  // phi_i + psi_j
  S plan_cost;      // integral of c against the atom
  bool tight;
};

template <class S>
struct SuperdiffReport {
  bool passed = true;
  bool feasible = true;
  std::vector<SuperdiffAtomCheck<S>> atoms;
};

/// The potential identity: P passes iff phi(pr1 pi) + psi(pr2 pi) equals the
/// plan's own cost for every atom, with (phi, psi) feasible for the outer
/// cost matrix.
template <class S>
SuperdiffReport<S> check_superdifferential_certificate(
    const RandomCoupling<S>& P, const std::vector<S>& phi, const std::vector<S>& psi,
    const NestedMeasure<S>& M1, const NestedMeasure<S>& M2, const CostSpec& c, const S& tol) {
  if (phi.size() != M1.size() || psi.size() != M2.size())
    throw IndexMismatch("potential length does not match atom count");
  SuperdiffReport<S> report;
  const InnerTable<S> table = inner_table(M1, M2, c);
  for (std::size_t i = 0; i < M1.size(); ++i)
    for (std::size_t j = 0; j < M2.size(); ++j)
      if (phi[i] + psi[j] > table.at(i, j).cost + tol) report.feasible = false;
  if (!report.feasible) report.passed = false;

  for (std::size_t k = 0; k < P.size(); ++k) {
    if (!(P.weights[k] > S(0))) continue;
    const int i = find_atom_index(M1, P.atoms[k].source, tol);
    const int j = find_atom_index(M2, P.atoms[k].target, tol);
    if (i < 0 || j < 0) throw IndexMismatch("atom marginal is not an atom of M1/M2");
    SuperdiffAtomCheck<S> check{i, j, phi[i] + psi[j], plan_cost(P.atoms[k], c), false};
    check.tight = !(abs_value(check.potential_sum - check.plan_cost) > tol);
    if (!check.tight) report.passed = false;
    report.atoms.push_back(std::move(check));
  }
  return report;
}

/// Membership of a single plan in the total C-superdifferential of (phi, psi):
/// the plan is optimal between its own marginals, the potentials are feasible
/// everywhere, and they touch the outer cost at the plan's marginal pair.
template <class S>
bool check_total_superdiff_membership(const Coupling<S>& pi, const std::vector<S>& phi,
                                      const std::vector<S>& psi, const NestedMeasure<S>& M1,
                                      const NestedMeasure<S>& M2, const CostSpec& c,
                                      const S& tol) {
  if (phi.size() != M1.size() || psi.size() != M2.size())
    throw IndexMismatch("potential length does not match atom count");
  const int i = find_atom_index(M1, pi.source, tol);
  const int j = find_atom_index(M2, pi.target, tol);
  if (i < 0 || j < 0) throw IndexMismatch("plan marginal is not an atom of M1/M2");
  const InnerTable<S> table = inner_table(M1, M2, c);
  for (std::size_t a = 0; a < M1.size(); ++a)
    for (std::size_t b = 0; b < M2.size(); ++b)
      if (phi[a] + psi[b] > table.at(a, b).cost + tol) return false;
  if (abs_value(phi[i] + psi[j] - table.at(i, j).cost) > tol) return false;
  return inner::is_optimal(pi, c, tol);
}

/// The C-transform psi_j = min_i (C_ij - phi_i).
template <class S>
std::vector<S> c_transform(const std::vector<S>& phi, const Matrix<S>& C) {
  if (C.empty() || C.size() != phi.size()) throw IndexMismatch("c_transform shape mismatch");
  std::vector<S> psi(C[0].size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    psi[j] = C[0][j] - phi[0];
    for (std::size_t i = 1; i < phi.size(); ++i)
      psi[j] = std::min(psi[j], C[i][j] - phi[i]);
  }
  return psi;
}

/// A discrete Rockafellar-Rueschendorf construction: potentials feasible for
/// the full outer cost matrix and tight on the given pairs, built by a
/// shortest-path relaxation. Returns nothing when the pairs admit a negative
/// cycle, i.e. when they are not C-cyclically monotone.
template <class S>
struct RRPotentials {
  std::vector<DiscreteMeasure<S>> firsts;
  std::vector<DiscreteMeasure<S>> seconds;
  std::vector<S> phi;  // indexed by firsts
  std::vector<S> psi;  // indexed by seconds
  std::vector<int> pair_first;
  std::vector<int> pair_second;
};

template <class S>
std::optional<RRPotentials<S>> rr_potentials(
    const std::vector<std::pair<DiscreteMeasure<S>, DiscreteMeasure<S>>>& pairs,
    const CostSpec& c) {
  if (pairs.empty()) return std::nullopt;
  const auto table = detail::pair_cost_table(pairs, c);
  const std::size_t A = table.firsts.size(), B = table.seconds.size();
  std::vector<S> psi(B, S(0));
  // psi_b <= psi_{b_t} + C[a_t][b] - C[a_t][b_t] for every pair t and column b
  for (std::size_t pass = 0; pass <= B; ++pass) {
    bool changed = false;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      const int at = table.pair_first[t], bt = table.pair_second[t];
      for (std::size_t b = 0; b < B; ++b) {
        const S bound = psi[bt] + table.cost[at][b] - table.cost[at][bt];
        if (psi[b] > bound) {
          psi[b] = bound;
          changed = true;
        }
      }
    }
    if (!changed) break;
    if (pass == B) return std::nullopt;  // negative cycle: not cyclically monotone
  }
  RRPotentials<S> out;
  out.firsts = table.firsts;
  out.seconds = table.seconds;
  out.pair_first = table.pair_first;
  out.pair_second = table.pair_second;
  out.psi = psi;
  out.phi.resize(A);
  for (std::size_t a = 0; a < A; ++a) {
    out.phi[a] = table.cost[a][0] - psi[0];
    for (std::size_t b = 1; b < B; ++b)
      out.phi[a] = std::min(out.phi[a], table.cost[a][b] - psi[b]);
  }
  return out;
}

}  // namespace cert

}  // namespace wow
