// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wow/wow.hpp"

using namespace wow;

namespace {

struct Outcome {
  bool passed = true;
  std::string detail;

  void fail(const std::string& why) {
    if (passed) detail = why;
    passed = false;
  }
};

DiscreteMeasure<double> grid_1d(int n, double a, double b) {
  std::vector<Point<double>> pts;
  for (int k = 0; k < n; ++k) pts.push_back(point1(a + (b - a) * (k + 0.5) / n));
  return uniform_on(std::move(pts));
}

DiscreteMeasure<double> grid_2d(int n, double ax, double bx, double ay, double by) {
  std::vector<Point<double>> pts;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      pts.push_back(Point<double>{{ax + (bx - ax) * (i + 0.5) / n,
                                   ay + (by - ay) * (j + 0.5) / n}});
  return uniform_on(std::move(pts));
}

NestedMeasure<double> nest(std::vector<DiscreteMeasure<double>> atoms,
                           std::vector<double> weights) {
  return canonicalize(NestedMeasure<double>{std::move(atoms), std::move(weights)});
}

// 1. Inner solver equals the exact oracle on 500 random instances.
Outcome criterion1() {
  Outcome out;
  std::mt19937_64 rng(1001);
  const double ps1d[] = {1.0, 2.0, 3.0};
  for (int t = 0; t < 500; ++t) {
    const int dim = (t % 4 == 3) ? 2 : 1;
    const CostSpec c = dim == 2 ? CostSpec::euclidean(2)
                                : CostSpec::euclidean(ps1d[t % 3]);
    const auto mu = oracle::random_measure(rng, 6, dim);
    const auto nu = oracle::random_measure(rng, 6, dim);
    const Rational exact = inner::solve(mu, nu, c).cost;
    const Rational reference =
        oracle::transport_ssp(mu.weights, nu.weights, cost_matrix(mu, nu, c));
    if (exact != reference) {
      out.fail("rational mismatch at instance " + std::to_string(t));
      break;
    }
    const double approx =
        to_double(inner::solve(oracle::to_double_measure(mu), oracle::to_double_measure(nu), c)
                      .cost);
    const double target = to_double(exact);
    if (std::fabs(approx - target) > 1e-9 * std::max(1.0, std::fabs(target))) {
      out.fail("float drift at instance " + std::to_string(t));
      break;
    }
  }
  return out;
}

// 2. Nested solver equals the brute-force vertex enumeration.
Outcome criterion2() {
  Outcome out;
  std::mt19937_64 rng(2002);
  for (int t = 0; t < 100; ++t) {
    const auto M1 = oracle::random_nested(rng, 3, 3, 1);
    const auto M2 = oracle::random_nested(rng, 3, 3, 1);
    const auto sol = solve_nested(M1, M2, CostSpec::euclidean(2));
    if (sol.cost != oracle::nested_brute_force(M1, M2, CostSpec::euclidean(2))) {
      out.fail("nested mismatch at instance " + std::to_string(t));
      break;
    }
  }
  return out;
}

// 3. Certificates characterize optimality with zero misclassifications.
Outcome criterion3() {
  Outcome out;
  std::mt19937_64 rng(2002);  // the instances of criterion 2
  const auto c = CostSpec::euclidean(2);
  long classified = 0;
  for (int t = 0; t < 100; ++t) {
    const auto M1 = oracle::random_nested(rng, 3, 3, 1);
    const auto M2 = oracle::random_nested(rng, 3, 3, 1);
    const auto sol = solve_nested(M1, M2, c);

    const auto classify = [&](const RandomCoupling<Rational>& P) {
      const Rational cost = random_coupling_cost(P, c);
      const bool monotone = cert::check_total_monotone(P.atoms, c, 4, Rational(0)).passed;
      const bool tight = cert::check_superdifferential_certificate(
                             P, sol.outer_duals.phi, sol.outer_duals.psi, M1, M2, c,
                             Rational(0))
                             .passed;
      ++classified;
      return (monotone && tight) == (cost == sol.cost);
    };

    if (!classify(sol.random_coupling)) {
      out.fail("solver coupling misclassified at instance " + std::to_string(t));
      return out;
    }

    int vertex_budget = 12;
    for (const auto& vertex : oracle::enumerate_vertices(M1.weights, M2.weights)) {
      if (--vertex_budget < 0) break;
      RandomCoupling<Rational> P;
      std::vector<std::pair<std::size_t, std::size_t>> cells;
      for (std::size_t i = 0; i < M1.size(); ++i)
        for (std::size_t j = 0; j < M2.size(); ++j)
          if (vertex[i][j] > 0) {
            P.atoms.push_back(inner::solve(M1.atoms[i], M2.atoms[j], c).plan);
            P.weights.push_back(vertex[i][j]);
            cells.emplace_back(i, j);
          }
      if (!classify(P)) {
        out.fail("optimal-selection candidate misclassified at instance " +
                 std::to_string(t));
        return out;
      }
      // corrupt each cell with suboptimal inner vertices in turn
      for (std::size_t cell = 0; cell < cells.size(); ++cell) {
        const auto& [i, j] = cells[cell];
        const auto& mu = M1.atoms[i];
        const auto& nu = M2.atoms[j];
        const Rational opt = inner::solve(mu, nu, c).cost;
        const auto cm = cost_matrix(mu, nu, c);
        int per_cell = 2;
        for (const auto& iv : oracle::enumerate_vertices(mu.weights, nu.weights)) {
          Rational value(0);
          for (std::size_t a = 0; a < mu.size(); ++a)
            for (std::size_t b = 0; b < nu.size(); ++b) value += iv[a][b] * cm[a][b];
          if (value == opt) continue;
          RandomCoupling<Rational> corrupted = P;
          corrupted.atoms[cell] = Coupling<Rational>{mu, nu, iv};
          if (!classify(corrupted)) {
            out.fail("corrupted candidate misclassified at instance " + std::to_string(t));
            return out;
          }
          if (--per_cell <= 0) break;
        }
      }
    }
  }
  out.detail = std::to_string(classified) + " couplings classified";
  return out;
}

// 4. Metric axioms for the nested distance.
Outcome criterion4() {
  Outcome out;
  std::mt19937_64 rng(4004);
  const double ps[] = {1.0, 2.0, 3.0};
  for (int t = 0; t < 200; ++t) {
    const CostSpec c = CostSpec::euclidean(ps[t % 3]);
    const auto A = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const auto B = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const auto C = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const double ab = nested_wasserstein(A, B, c);
    const double ba = nested_wasserstein(B, A, c);
    if (std::fabs(ab - ba) > 1e-12) {
      out.fail("symmetry violated at triple " + std::to_string(t));
      break;
    }
    const double ac = nested_wasserstein(A, C, c);
    const double bc = nested_wasserstein(B, C, c);
    if (ac - (ab + bc) > 1e-9) {
      out.fail("triangle inequality violated at triple " + std::to_string(t));
      break;
    }
  }
  return out;
}

// 5. Lifting fidelity: domination always, realizability exactly.
Outcome criterion5() {
  Outcome out;
  std::mt19937_64 rng(5005);
  const auto c = CostSpec::euclidean(2);
  for (int t = 0; t < 200; ++t) {
    const auto mu = oracle::to_double_measure(oracle::random_measure(rng, 5, 1));
    const auto nu = oracle::to_double_measure(oracle::random_measure(rng, 5, 1));
    auto Z1 = lift_measure(mu);
    auto Z2 = lift_measure(nu);
    if (t % 2) {
      Z1 = random_rearrangement(Z1, rng);
      Z2 = random_rearrangement(Z2, rng);
    }
    const double inner_cost = to_double(inner::solve(mu, nu, c).cost);
    if (inner_cost > lifted_cost(Z1, Z2, c) + 1e-9) {
      out.fail("lifted cost undercut the inner cost at pair " + std::to_string(t));
      return out;
    }
  }
  long realized = 0;
  for (int t = 0; t < 25; ++t) {
    const auto mu = oracle::random_measure(rng, 4, 1, 8, 6);
    const auto nu = oracle::random_measure(rng, 4, 1, 8, 6);
    const auto Z1 = lift_measure(mu);
    for (const auto& vertex : oracle::enumerate_vertices(mu.weights, nu.weights)) {
      const Coupling<Rational> pi{mu, nu, vertex};
      const auto Z2 = rearrange_to_coupling(Z1, pi, Rational(0));
      ++realized;
      if (lifted_cost(Z1, Z2, c) != plan_cost(pi, c) ||
          tv_distance(joint_law(Z1, Z2), pi) != Rational(0)) {
        out.fail("vertex plan not realized exactly at pair " + std::to_string(t));
        return out;
      }
    }
  }
  out.detail = std::to_string(realized) + " vertex plans realized exactly";
  return out;
}

// 6. Strict Monge exactness on the equal-size 1D subclass.
Outcome criterion6() {
  Outcome out;
  std::mt19937_64 rng(6006);
  for (int t = 0; t < 100; ++t) {
    const int outer = 2 + static_cast<int>(rng() % 3);
    const int inner = 3 + static_cast<int>(rng() % 3);
    std::vector<DiscreteMeasure<double>> a1, a2;
    std::vector<double> w(outer, 1.0 / outer);
    for (int k = 0; k < outer; ++k) {
      a1.push_back(oracle::jittered_grid_1d(rng, inner, 4.0 * k, 0.7));
      a2.push_back(oracle::jittered_grid_1d(rng, inner, 4.0 * k + 1.5, 0.7));
    }
    const auto strict =
        monge::strict_monge_equal_size(nest(a1, w), nest(a2, w), CostSpec::euclidean(2));
    if (std::fabs(to_double(strict.gap)) > 1e-9) {
      out.fail("gap " + std::to_string(to_double(strict.gap)) + " at instance " +
               std::to_string(t));
      break;
    }
  }
  return out;
}

// 7. Pratelli refinement trend on five fixed fixtures.
Outcome criterion7() {
  Outcome out;
  struct Fixture {
    std::string name;
    NestedMeasure<double> M1, M2;
    bool one_dimensional;
  };
  std::vector<Fixture> fixtures;
  fixtures.push_back({"1d-translation",
                      nest({grid_1d(64, 0, 1)}, {1.0}),
                      nest({grid_1d(64, 2, 3)}, {1.0}),
                      true});
  fixtures.push_back({"1d-compression",
                      nest({grid_1d(64, 0, 2), grid_1d(64, 3, 5)}, {0.5, 0.5}),
                      nest({grid_1d(64, 8, 9), grid_1d(64, 11, 12)}, {0.5, 0.5}),
                      true});
  fixtures.push_back({"1d-skewed-weights",
                      nest({grid_1d(64, 0, 1), grid_1d(64, 2, 3)}, {0.25, 0.75}),
                      nest({grid_1d(64, 6, 7), grid_1d(64, 8, 9)}, {0.25, 0.75}),
                      true});
  fixtures.push_back({"2d-translation",
                      nest({grid_2d(8, 0, 1, 0, 1)}, {1.0}),
                      nest({grid_2d(8, 3, 4, 0, 1)}, {1.0}),
                      false});
  fixtures.push_back({"2d-two-atoms",
                      nest({grid_2d(8, 0, 1, 0, 1), grid_2d(8, 0, 2, 0, 1)}, {0.5, 0.5}),
                      nest({grid_2d(8, 5, 6, 0, 1), grid_2d(8, 5, 7, 0, 1)}, {0.5, 0.5}),
                      false});

  std::ostringstream detail;
  for (const auto& fixture : fixtures) {
    const auto rows = monge::pratelli_refinement_experiment(fixture.M1, fixture.M2,
                                                            CostSpec::euclidean(2), 6);
    for (std::size_t k = 1; k < rows.size(); ++k)
      if (to_double(rows[k].gap) > to_double(rows[k - 1].gap) + 1e-12)
        out.fail(fixture.name + ": gap increased at level " + std::to_string(rows[k].level));
    if (fixture.one_dimensional && to_double(rows.back().gap) > 1e-3)
      out.fail(fixture.name + ": level-6 gap " + std::to_string(to_double(rows.back().gap)));
    detail << fixture.name << " gap6=" << to_double(rows.back().gap) << " ";
  }
  if (out.passed) out.detail = detail.str();
  return out;
}

// 8. The sup-norm counterexample and its euclidean repair.
Outcome criterion8() {
  Outcome out;
  const auto report = monge::linfty_counterexample(4, 2.0);
  if (std::fabs(report.cost_a - report.cost_b) > 1e-12) out.fail("costs differ");
  if (!inner::is_optimal(report.plan_a, CostSpec::ellinf(2), 1e-9)) out.fail("plan_a suboptimal");
  if (!inner::is_optimal(report.plan_b, CostSpec::ellinf(2), 1e-9)) out.fail("plan_b suboptimal");
  if (report.plan_distance < 0.5) out.fail("plans are not far apart");
  const auto euclid = monge::linfty_counterexample(4, 2.0, Norm::euclidean);
  if (euclid.cost_b - euclid.cost_a < 0.9) out.fail("euclidean excess below 0.9");
  if (out.passed) {
    std::ostringstream detail;
    detail << "cost=" << report.cost_a << " tv=" << report.plan_distance
           << " euclidean_excess=" << euclid.cost_b - euclid.cost_a;
    out.detail = detail.str();
  }
  return out;
}

// 9. Uniqueness probe on jittered grids versus the sup-norm fixture.
Outcome criterion9() {
  Outcome out;
  std::mt19937_64 rng(9009);
  for (int t = 0; t < 50; ++t) {
    const auto a = oracle::jittered_grid_1d(rng, 5, 0.0, 1.0);
    const auto b = oracle::jittered_grid_1d(rng, 5, 8.0, 1.0);
    const auto c = oracle::jittered_grid_1d(rng, 5, 16.0, 1.0);
    const auto d = oracle::jittered_grid_1d(rng, 5, 24.0, 1.0);
    const auto report =
        monge::uniqueness_probe(nest({a, b}, {0.5, 0.5}), nest({c, d}, {0.5, 0.5}),
                                CostSpec::euclidean(2), 5, 9000 + t);
    if (!report.consistent_with_uniqueness) {
      out.fail("jittered instance " + std::to_string(t) + " flagged non-unique (spread " +
               std::to_string(report.max_pairwise_distance) + ")");
      break;
    }
  }
  const auto ce = monge::linfty_counterexample(2, 2.0);
  const auto flagged =
      monge::uniqueness_probe(nest({ce.plan_a.source}, {1.0}), nest({ce.plan_a.target}, {1.0}),
                              CostSpec::ellinf(2), 6, 77);
  if (flagged.consistent_with_uniqueness)
    out.fail("sup-norm fixture not flagged as non-unique");
  return out;
}

// 10. Intensity contraction.
Outcome criterion10() {
  Outcome out;
  std::mt19937_64 rng(10010);
  const auto c = CostSpec::euclidean(2);
  for (int t = 0; t < 200; ++t) {
    const auto M1 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const auto M2 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const double nested_cost = to_double(solve_nested(M1, M2, c).cost);
    const double mixture = to_double(inner::solve(intensity(M1), intensity(M2), c).cost);
    if (mixture > nested_cost + 1e-9) {
      out.fail("contraction violated at instance " + std::to_string(t));
      break;
    }
  }
  return out;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    Outcome (*run)();
    double budget_seconds;
  };
  const Entry entries[] = {
      {1, "inner solver matches the exact transportation oracle", criterion1, 30},
      {2, "nested solver matches the brute-force vertex enumeration", criterion2, 60},
      {3, "certificates decide optimality with zero misclassifications", criterion3, 0},
      {4, "nested distance satisfies the metric axioms", criterion4, 0},
      {5, "lifted costs dominate and rearrangements realize vertex plans", criterion5, 0},
      {6, "strict Monge gap vanishes on the equal-size 1D subclass", criterion6, 0},
      {7, "Pratelli refinement gaps trend down on the fixed fixtures", criterion7, 300},
      {8, "sup-norm non-uniqueness with euclidean repair", criterion8, 0},
      {9, "uniqueness probe separates jittered grids from the sup-norm fixture", criterion9, 0},
      {10, "intensity contraction bounds the nested cost", criterion10, 0},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = entry.run();
    } catch (const std::exception& e) {
      outcome.fail(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (entry.budget_seconds > 0 && seconds > entry.budget_seconds)
      outcome.fail("runtime " + std::to_string(seconds) + "s exceeded " +
                   std::to_string(entry.budget_seconds) + "s");
    if (!outcome.passed) ++failures;
    std::printf("[%s] criterion %2d: %s (%.2fs)%s%s\n", outcome.passed ? "PASS" : "FAIL",
                entry.id, entry.label, seconds, outcome.detail.empty() ? "" : " -- ",
                outcome.detail.c_str());
  }
  return failures;
}
