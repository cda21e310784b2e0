#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "wow/wow.hpp"

using namespace wow;
using testutil::dirac1;
using testutil::dm1;
using testutil::nested;

namespace {

NestedMeasure<double> two_by_two_m1() {
  return nested<double>({dirac1<double>(0.0), dirac1<double>(4.0)}, {0.5, 0.5});
}
NestedMeasure<double> two_by_two_m2() {
  return nested<double>({dirac1<double>(1.0), dirac1<double>(3.0)}, {0.5, 0.5});
}

}  // namespace

TEST_CASE("outer cost matrix on dirac atoms") {
  const auto c2 = CostSpec::euclidean(2);
  const auto single = outer_cost_matrix(nested<double>({dirac1<double>(0.0)}, {1.0}),
                                        nested<double>({dirac1<double>(1.0)}, {1.0}), c2);
  REQUIRE(single[0][0] == Catch::Approx(1.0));

  const auto cm = outer_cost_matrix(two_by_two_m1(), two_by_two_m2(), c2);
  REQUIRE(cm[0][0] == Catch::Approx(1.0));
  REQUIRE(cm[0][1] == Catch::Approx(9.0));
  REQUIRE(cm[1][0] == Catch::Approx(9.0));
  REQUIRE(cm[1][1] == Catch::Approx(1.0));

  const auto M = nested<double>({dm1<double>({0, 1}, {0.5, 0.5}), dirac1<double>(2.0)},
                                {0.5, 0.5});
  const auto self = outer_cost_matrix(M, M, c2);
  REQUIRE(self[0][0] == Catch::Approx(0.0));
  REQUIRE(self[1][1] == Catch::Approx(0.0));
}

TEST_CASE("outer cost matrix is independent of the job count") {
  std::mt19937_64 rng(17);
  const auto M1 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
  const auto M2 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
  const auto a = outer_cost_matrix(M1, M2, CostSpec::euclidean(2), 1);
  const auto b = outer_cost_matrix(M1, M2, CostSpec::euclidean(2), 4);
  REQUIRE(a == b);
}

TEST_CASE("solve_nested on a singleton pair reduces to the inner problem") {
  const auto mu = dm1<double>({0, 1}, {0.5, 0.5});
  const auto nu = dm1<double>({2, 3}, {0.25, 0.75});
  const auto c2 = CostSpec::euclidean(2);
  const auto sol = solve_nested(nested<double>({mu}, {1.0}), nested<double>({nu}, {1.0}), c2);
  const auto direct = inner::solve(mu, nu, c2);
  REQUIRE(sol.cost == Catch::Approx(direct.cost));
  REQUIRE(sol.random_coupling.size() == 1);
  REQUIRE(tv_distance(sol.random_coupling.atoms[0], direct.plan) ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("solve_nested picks the diagonal on the 2x2 dirac instance") {
  const auto sol = solve_nested(two_by_two_m1(), two_by_two_m2(), CostSpec::euclidean(2));
  REQUIRE(sol.cost == Catch::Approx(1.0));
  REQUIRE(sol.outer_plan.matrix[0][0] == Catch::Approx(0.5));
  REQUIRE(sol.outer_plan.matrix[1][1] == Catch::Approx(0.5));
  REQUIRE(sol.random_coupling.size() == 2);
  REQUIRE(random_coupling_cost(sol.random_coupling, CostSpec::euclidean(2)) ==
          Catch::Approx(1.0));
}

TEST_CASE("nested self-distance vanishes with the identity outer plan") {
  std::mt19937_64 rng(29);
  const auto M = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
  const auto sol = solve_nested(M, M, CostSpec::euclidean(2));
  REQUIRE(sol.cost == Catch::Approx(0.0).margin(1e-12));
  for (std::size_t i = 0; i < M.size(); ++i)
    REQUIRE(sol.outer_plan.matrix[i][i] == Catch::Approx(M.weights[i]));
}

TEST_CASE("random coupling objective on handmade laws") {
  const auto c2 = CostSpec::euclidean(2);
  const auto mu = dm1<double>({0, 1}, {0.5, 0.5});
  RandomCoupling<double> ident{{identity_plan(mu)}, {1.0}};
  REQUIRE(random_coupling_cost(ident, c2) == Catch::Approx(0.0));

  RandomCoupling<double> swap{
      {testutil::plan_between(mu, mu, {{0.0, 0.5}, {0.5, 0.0}})}, {1.0}};
  REQUIRE(random_coupling_cost(swap, c2) == Catch::Approx(1.0));
}

TEST_CASE("eq71: the induced-coupling value never exceeds the objective") {
  const auto c2 = CostSpec::euclidean(2);

  SECTION("solver output achieves equality") {
    const auto sol = solve_nested(two_by_two_m1(), two_by_two_m2(), c2);
    const auto report = verify_eq71(sol.random_coupling, c2, 1e-9);
    REQUIRE(report.inequality_ok);
    REQUIRE(report.equality);
    REQUIRE(to_double(report.gap) == Catch::Approx(0.0).margin(1e-9));
  }

  SECTION("an inner-suboptimal atom opens a strict gap") {
    const auto mu = dm1<double>({0, 1}, {0.5, 0.5});
    RandomCoupling<double> P{
        {testutil::plan_between(mu, mu, {{0.0, 0.5}, {0.5, 0.0}})}, {1.0}};
    const auto report = verify_eq71(P, c2, 1e-9);
    REQUIRE(report.lhs == Catch::Approx(0.0));
    REQUIRE(report.rhs == Catch::Approx(1.0));
    REQUIRE(report.inequality_ok);
    REQUIRE_FALSE(report.equality);
  }

  SECTION("dirac-to-dirac plans are forced, so equality always holds") {
    RandomCoupling<double> P{
        {Coupling<double>{dirac1<double>(0.0), dirac1<double>(5.0), {{1.0}}}}, {1.0}};
    const auto report = verify_eq71(P, c2, 1e-9);
    REQUIRE(to_double(report.gap) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(report.equality);
  }
}

TEST_CASE("solve_nested matches the brute-force oracle exactly") {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 20; ++trial) {
    const auto M1 = oracle::random_nested(rng, 3, 3, 1);
    const auto M2 = oracle::random_nested(rng, 3, 3, 1);
    const auto sol = solve_nested(M1, M2, CostSpec::euclidean(2));
    REQUIRE(sol.cost == oracle::nested_brute_force(M1, M2, CostSpec::euclidean(2)));
    REQUIRE(validate_random_coupling(sol.random_coupling, M1, M2, Rational(0)));
    for (const auto& atom : sol.random_coupling.atoms)
      REQUIRE(inner::is_optimal(atom, CostSpec::euclidean(2), Rational(0)));
  }
}

TEST_CASE("nested W_p is a metric") {
  std::mt19937_64 rng(71);
  const auto c = CostSpec::euclidean(2);
  for (int trial = 0; trial < 15; ++trial) {
    const auto A = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const auto B = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const auto C = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const double ab = nested_wasserstein(A, B, c);
    REQUIRE(ab == Catch::Approx(nested_wasserstein(B, A, c)).margin(1e-12));
    REQUIRE(nested_wasserstein(A, C, c) <= ab + nested_wasserstein(B, C, c) + 1e-9);
  }
  const auto M = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
  REQUIRE(nested_wasserstein(M, M, c) == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("refinement stability: splitting an atom moves the cost by o(eps)") {
  std::mt19937_64 rng(83);
  const auto M1 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1, 8));
  const auto M2 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1, 8));
  const auto c = CostSpec::euclidean(2);
  const double base = to_double(solve_nested(M1, M2, c).cost);

  for (const double eps : {1e-3, 1e-5}) {
    NestedMeasure<double> split = M1;
    DiscreteMeasure<double> inner_atom = split.atoms[0];
    DiscreteMeasure<double> refined;
    refined.atoms.push_back(point1(inner_atom.atoms[0][0] - eps / 2));
    refined.atoms.push_back(point1(inner_atom.atoms[0][0] + eps / 2));
    refined.weights = {inner_atom.weights[0] / 2, inner_atom.weights[0] / 2};
    for (std::size_t k = 1; k < inner_atom.size(); ++k) {
      refined.atoms.push_back(inner_atom.atoms[k]);
      refined.weights.push_back(inner_atom.weights[k]);
    }
    split.atoms[0] = canonicalize(refined);
    split = canonicalize_deep(split);
    const double moved = to_double(solve_nested(split, M2, c).cost);

    double diameter = 0;
    for (const auto& m : {M1, M2})
      for (const auto& atom : m.atoms)
        for (const auto& pt : atom.atoms)
          diameter = std::max(diameter, 2 * std::fabs(pt[0]) + eps);
    REQUIRE(std::fabs(moved - base) <= c.p * std::pow(diameter, c.p - 1) * eps * 2 + 1e-12);
  }
}

TEST_CASE("outer duals certify the optimal value") {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    const auto M1 = oracle::random_nested(rng, 4, 3, 1);
    const auto M2 = oracle::random_nested(rng, 4, 3, 1);
    const auto sol = solve_nested(M1, M2, CostSpec::euclidean(2));
    Rational dual(0);
    for (std::size_t i = 0; i < M1.size(); ++i) dual += sol.outer_duals.phi[i] * M1.weights[i];
    for (std::size_t j = 0; j < M2.size(); ++j) dual += sol.outer_duals.psi[j] * M2.weights[j];
    REQUIRE(dual == sol.cost);
  }
}

TEST_CASE("intensity contraction against the nested cost") {
  std::mt19937_64 rng(113);
  const auto c = CostSpec::euclidean(2);
  for (int trial = 0; trial < 25; ++trial) {
    const auto M1 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const auto M2 = oracle::to_double_nested(oracle::random_nested(rng, 3, 3, 1));
    const double nested_cost = to_double(solve_nested(M1, M2, c).cost);
    const double mixed = to_double(inner::solve(intensity(M1), intensity(M2), c).cost);
    REQUIRE(mixed <= nested_cost + 1e-9);
  }
}
