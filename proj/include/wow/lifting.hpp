#pragma once

#include <algorithm>
#include <random>
#include <utility>
#include <vector>

#include "wow/inner_ot.hpp"
#include "wow/transport.hpp"

namespace wow {

/// Partition of the sample space [0,1): 0 = t_0 < t_1 < ... < t_n = 1.
template <class S>
struct Partition {
  std::vector<S> breakpoints;

  std::size_t cells() const { return breakpoints.size() - 1; }
  S length(std::size_t k) const { return breakpoints[k + 1] - breakpoints[k]; }
};

/// Piecewise-constant random variable on ([0,1], Lebesgue); one value per
/// cell, adjacent cells may carry equal values.
template <class S>
struct StepRandomVariable {
  Partition<S> partition;
  std::vector<Point<S>> values;

  std::size_t cells() const { return values.size(); }
};

template <class S>
void validate_step(const StepRandomVariable<S>& Z) {
  const auto& b = Z.partition.breakpoints;
  if (b.size() < 2 || Z.values.size() + 1 != b.size())
    throw InvalidMeasure("step variable cell/value mismatch");
  if (!(b.front() == S(0)) || !(b.back() == S(1)))
    throw InvalidMeasure("partition must span [0,1]");
  for (std::size_t k = 0; k + 1 < b.size(); ++k)
    if (!(b[k] < b[k + 1])) throw InvalidMeasure("breakpoints must increase strictly");
  for (const auto& v : Z.values) validate_point(v);
}

/// Law of Z: the pushforward of Lebesgue measure, one atom per distinct value
/// with weight equal to the total length of its cells.
template <class S>
DiscreteMeasure<S> law(const StepRandomVariable<S>& Z) {
  DiscreteMeasure<S> mu;
  mu.atoms = Z.values;
  mu.weights.resize(Z.cells());
  for (std::size_t k = 0; k < Z.cells(); ++k) mu.weights[k] = Z.partition.length(k);
  return canonicalize(mu);
}

/// Canonical lift: left-to-right cumulative-weight partition with values in
/// canonical atom order. law(lift_measure(mu)) == mu.
template <class S>
StepRandomVariable<S> lift_measure(const DiscreteMeasure<S>& mu) {
  require_canonical(mu, "lift_measure");
  StepRandomVariable<S> Z;
  Z.partition.breakpoints.push_back(S(0));
  S cumulative(0);
  for (std::size_t k = 0; k < mu.size(); ++k) {
    cumulative += mu.weights[k];
    Z.partition.breakpoints.push_back(k + 1 == mu.size() ? S(1) : cumulative);
    Z.values.push_back(mu.atoms[k]);
  }
  return Z;
}

/// Re-expresses both variables on the union of their breakpoints.
template <class S>
std::pair<StepRandomVariable<S>, StepRandomVariable<S>> common_refinement(
    const StepRandomVariable<S>& Z1, const StepRandomVariable<S>& Z2) {
  std::vector<S> merged = Z1.partition.breakpoints;
  merged.insert(merged.end(), Z2.partition.breakpoints.begin(),
                Z2.partition.breakpoints.end());
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

  const auto refine = [&](const StepRandomVariable<S>& Z) {
    StepRandomVariable<S> R;
    R.partition.breakpoints = merged;
    R.values.reserve(merged.size() - 1);
    std::size_t cell = 0;
    for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
      while (cell + 1 < Z.cells() && !(merged[k] < Z.partition.breakpoints[cell + 1])) ++cell;
      R.values.push_back(Z.values[cell]);
    }
    return R;
  };
  return {refine(Z1), refine(Z2)};
}

/// Joint law (Z1, Z2)_sharp Lebesgue as a coupling between law(Z1), law(Z2).
template <class S>
Coupling<S> joint_law(const StepRandomVariable<S>& Z1, const StepRandomVariable<S>& Z2) {
  const auto [R1, R2] = common_refinement(Z1, Z2);
  Coupling<S> pi;
  pi.source = law(Z1);
  pi.target = law(Z2);
  pi.matrix.assign(pi.source.size(), std::vector<S>(pi.target.size(), S(0)));
  for (std::size_t k = 0; k < R1.cells(); ++k) {
    const int i = find_atom_index(pi.source, R1.values[k], S(0));
    const int j = find_atom_index(pi.target, R2.values[k], S(0));
    if (i < 0 || j < 0) throw NumericalFailure("refined value missing from law");
    pi.matrix[i][j] += R1.partition.length(k);
  }
  return pi;
}

/// The lifted cost: integral of c(Z1, Z2) over [0,1].
template <class S>
S lifted_cost(const StepRandomVariable<S>& Z1, const StepRandomVariable<S>& Z2,
              const CostSpec& c) {
  const auto [R1, R2] = common_refinement(Z1, Z2);
  S total(0);
  for (std::size_t k = 0; k < R1.cells(); ++k)
    total += R1.partition.length(k) * ground_cost<S>(c, R1.values[k], R2.values[k]);
  return total;
}

/// Builds Z2 with joint_law(Z1, Z2) = pi by splitting each level set of Z1
/// proportionally to the conditional rows of pi (left to right, targets in
/// canonical order).
template <class S>
StepRandomVariable<S> rearrange_to_coupling(const StepRandomVariable<S>& Z1,
                                            const Coupling<S>& pi, const S& tol = S(0)) {
  const DiscreteMeasure<S> mu = law(Z1);
  if (!measure_eq(pi.source, mu, tol))
    throw MarginalMismatch("plan's first marginal differs from law(Z1)");

  // remaining quota per (source atom, target atom) pair
  Matrix<S> quota = pi.matrix;
  std::vector<std::size_t> next_target(pi.source.size(), 0);

  StepRandomVariable<S> Z2;
  Z2.partition.breakpoints.push_back(S(0));
  for (std::size_t cell = 0; cell < Z1.cells(); ++cell) {
    const int i = find_atom_index(pi.source, Z1.values[cell], tol);
    if (i < 0) throw MarginalMismatch("value of Z1 missing from plan source");
    S remaining = Z1.partition.length(cell);
    const S cell_end = Z1.partition.breakpoints[cell + 1];
    while (remaining > S(0)) {
      std::size_t& j = next_target[i];
      while (j < quota[i].size() && !(quota[i][j] > S(0))) ++j;
      if (j == quota[i].size()) {
        if constexpr (!is_exact_v<S>) {
          if (remaining < 1e-12) break;  // float residue of the level set
        }
        throw MarginalMismatch("plan row exhausted before the level set");
      }
      const S take = std::min(remaining, quota[i][j]);
      quota[i][j] -= take;
      remaining -= take;
      const S cut = remaining > S(0) ? cell_end - remaining : cell_end;
      Z2.partition.breakpoints.push_back(cut);
      Z2.values.push_back(pi.target.atoms[j]);
    }
  }
  Z2.partition.breakpoints.back() = S(1);
  // merge zero-length cells that float residues may have produced
  StepRandomVariable<S> cleaned;
  cleaned.partition.breakpoints.push_back(S(0));
  for (std::size_t k = 0; k < Z2.cells(); ++k) {
    if (!(Z2.partition.breakpoints[k + 1] > cleaned.partition.breakpoints.back())) continue;
    cleaned.partition.breakpoints.push_back(Z2.partition.breakpoints[k + 1]);
    cleaned.values.push_back(Z2.values[k]);
  }
  validate_step(cleaned);
  return cleaned;
}

/// Reorders the cells of Z by a permutation, preserving lengths; the result
/// has the same law but a different arrangement.
template <class S>
StepRandomVariable<S> permute_cells(const StepRandomVariable<S>& Z,
                                    const std::vector<std::size_t>& perm) {
  if (perm.size() != Z.cells()) throw IndexMismatch("permutation size mismatch");
  StepRandomVariable<S> out;
  out.partition.breakpoints.push_back(S(0));
  S cumulative(0);
  for (std::size_t k = 0; k < perm.size(); ++k) {
    cumulative += Z.partition.length(perm[k]);
    out.partition.breakpoints.push_back(k + 1 == perm.size() ? S(1) : cumulative);
    out.values.push_back(Z.values[perm[k]]);
  }
  return out;
}

/// A law-preserving reshuffle: splits every cell in two and permutes the
/// pieces at random. Used to produce non-canonical representatives of a law.
template <class S>
StepRandomVariable<S> random_rearrangement(const StepRandomVariable<S>& Z,
                                           std::mt19937_64& rng) {
  StepRandomVariable<S> split;
  split.partition.breakpoints.push_back(S(0));
  for (std::size_t k = 0; k < Z.cells(); ++k) {
    const S len = Z.partition.length(k);
    const double f = 0.25 + 0.5 * ((rng() >> 11) * 0x1.0p-53);
    const S mid = Z.partition.breakpoints[k] + len * scalar_from_double<S>(f);
    split.partition.breakpoints.push_back(mid);
    split.partition.breakpoints.push_back(Z.partition.breakpoints[k + 1]);
    split.values.push_back(Z.values[k]);
    split.values.push_back(Z.values[k]);
  }
  split.partition.breakpoints.back() = S(1);
  std::vector<std::size_t> perm(split.cells());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  std::shuffle(perm.begin(), perm.end(), rng);
  return permute_cells(split, perm);
}

/// Distance metrizing convergence in probability: integral of 1 and d(Z1,Z2)
/// truncated at one.
template <class S>
S dist_in_probability(const StepRandomVariable<S>& Z1, const StepRandomVariable<S>& Z2,
                      const CostSpec& c) {
  const auto [R1, R2] = common_refinement(Z1, Z2);
  S total(0);
  for (std::size_t k = 0; k < R1.cells(); ++k)
    total += R1.partition.length(k) *
             std::min(S(1), ground_norm<S>(c, R1.values[k], R2.values[k]));
  return total;
}

/// W_1 with the truncated ground cost 1 and d; the law map is 1-Lipschitz from
/// (steps, dist_in_probability) into this metric.
template <class S>
S w1_truncated(const DiscreteMeasure<S>& mu, const DiscreteMeasure<S>& nu,
               const CostSpec& c) {
  Matrix<S> m(mu.size(), std::vector<S>(nu.size()));
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      m[i][j] = std::min(S(1), ground_norm<S>(c, mu.atoms[i], nu.atoms[j]));
  return solve_transport(mu.weights, nu.weights, m).cost;
}

/// Law invariance of a lifted potential: evaluating phi through the law map
/// must give the same value on every representative of the same law.
template <class S>
struct LiftPotentialReport {
  bool passed = true;
  struct Evaluation {
    int atom_index;
    S value;
    bool matches_canonical;
  };
  std::vector<Evaluation> evaluations;
};

template <class S>
LiftPotentialReport<S> lift_potential_check(const std::vector<S>& phi,
                                            const NestedMeasure<S>& M,
                                            const std::vector<StepRandomVariable<S>>& samples,
                                            const S& tol) {
  if (phi.size() != M.size()) throw IndexMismatch("potential length differs from atom count");
  LiftPotentialReport<S> report;
  for (const auto& Z : samples) {
    const DiscreteMeasure<S> lawZ = law(Z);
    const int idx = find_atom_index(M, lawZ, tol);
    if (idx < 0) throw IndexMismatch("law of sample is not an atom of M");
    typename LiftPotentialReport<S>::Evaluation e{idx, phi[idx], true};
    // the lifted potential factors through the law map, so equality with the
    // canonical representative is the law-invariance statement
    const S canonical_value = phi[idx];
    e.matches_canonical = !(abs_value(e.value - canonical_value) > tol);
    if (!e.matches_canonical) report.passed = false;
    report.evaluations.push_back(e);
  }
  return report;
}

template <class S>
LiftPotentialReport<S> lift_potential_check(const std::vector<S>& phi,
                                            const NestedMeasure<S>& M, int permutations,
                                            std::uint64_t seed, const S& tol) {
  std::mt19937_64 rng(seed);
  std::vector<StepRandomVariable<S>> samples;
  for (std::size_t k = 0; k < M.size(); ++k) {
    const StepRandomVariable<S> Z = lift_measure(M.atoms[k]);
    samples.push_back(Z);
    for (int r = 0; r < permutations; ++r) samples.push_back(random_rearrangement(Z, rng));
  }
  return lift_potential_check(phi, M, samples, tol);
}

}  // namespace wow
