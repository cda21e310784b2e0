// wow: nested optimal transport between laws of random measures.
//
// Subcommands: dist, plan, potentials, verify, lift, monge, counterexample.
// Exit codes: 0 success, 1 verification failure, 2 usage/parse error,
// 3 numerical/solver failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wow/wow.hpp"

namespace {

using wow::Json;

struct CommonArgs {
  std::string instance_path;
  std::string output_path;
  std::optional<std::string> mode;
  std::optional<double> tol, tol_sum, tol_feas, tol_gap;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_instance = true) {
  auto* inst = cmd->add_option("-i,--instance", args.instance_path, "instance JSON file");
  if (needs_instance) inst->required();
  cmd->add_option("-o,--output", args.output_path, "write the report here instead of stdout");
  cmd->add_option("--mode", args.mode, "float or rational arithmetic");
  cmd->add_option("--tol", args.tol, "override tol_sum, tol_feas and tol_gap jointly");
  cmd->add_option("--tol-sum", args.tol_sum, "marginal-sum tolerance");
  cmd->add_option("--tol-feas", args.tol_feas, "dual feasibility tolerance");
  cmd->add_option("--tol-gap", args.tol_gap, "duality-gap tolerance");
  cmd->add_option("--seed", args.seed, "seed for all randomized procedures");
  cmd->add_option("--jobs", args.jobs, "parallel inner solves")->envname("WOW_JOBS");
}

template <class S>
wow::Instance<S> load_instance(const CommonArgs& args) {
  wow::Instance<S> inst = wow::instance_from_json<S>(wow::load_json_file(args.instance_path));
  if (args.mode) inst.options.mode = *args.mode;
  if (args.tol) inst.options.tol = args.tol;
  if (args.tol_sum) inst.options.tol_sum = args.tol_sum;
  if (args.tol_feas) inst.options.tol_feas = args.tol_feas;
  if (args.tol_gap) inst.options.tol_gap = args.tol_gap;
  if (args.seed) inst.options.seed = *args.seed;
  if (args.jobs) inst.options.jobs = *args.jobs;
  return inst;
}

void emit(const Json& report, const CommonArgs& args) {
  if (args.output_path.empty()) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::ofstream out(args.output_path);
    if (!out) throw wow::ParseError("cannot write " + args.output_path);
    out << report.dump(2) << "\n";
  }
}

std::string requested_mode(const CommonArgs& args) {
  if (args.mode) return *args.mode;
  if (args.instance_path.empty()) return "float";
  const Json j = wow::load_json_file(args.instance_path);
  if (j.contains("options") && j.at("options").contains("mode"))
    return j.at("options").at("mode").get<std::string>();
  return "float";
}

// ---- dist / plan / potentials -------------------------------------------------

template <class S>
Json run_dist(const CommonArgs& args) {
  const auto inst = load_instance<S>(args);
  const auto sol = wow::solve_nested(inst.m1, inst.m2, inst.cost, inst.options.jobs);
  Json j{{"cost", wow::to_double(sol.cost)},
         {"wow_distance", std::pow(wow::to_double(sol.cost), 1.0 / inst.cost.p)}};
  if constexpr (wow::is_exact_v<S>) j["cost_exact"] = wow::rational_to_string(sol.cost);
  return j;
}

template <class S>
Json run_plan(const CommonArgs& args) {
  const auto inst = load_instance<S>(args);
  const auto sol = wow::solve_nested(inst.m1, inst.m2, inst.cost, inst.options.jobs);
  return wow::nested_solution_to_json(sol);
}

template <class S>
Json run_potentials(const CommonArgs& args) {
  const auto inst = load_instance<S>(args);
  const auto sol = wow::solve_nested(inst.m1, inst.m2, inst.cost, inst.options.jobs);
  S dual_value(0);
  for (std::size_t i = 0; i < inst.m1.size(); ++i)
    dual_value += sol.outer_duals.phi[i] * inst.m1.weights[i];
  for (std::size_t j = 0; j < inst.m2.size(); ++j)
    dual_value += sol.outer_duals.psi[j] * inst.m2.weights[j];
  Json inner = Json::array();
  for (std::size_t k = 0; k < sol.random_coupling.size(); ++k) {
    const auto [i, j] = sol.coupling_cells[k];
    inner.push_back(Json{{"source_index", i},
                         {"target_index", j},
                         {"phi", wow::scalars_to_json(sol.inner.at(i, j).duals.phi)},
                         {"psi", wow::scalars_to_json(sol.inner.at(i, j).duals.psi)}});
  }
  return Json{{"cost", wow::to_double(sol.cost)},
              {"dual_value", wow::to_double(dual_value)},
              {"gap", wow::to_double(sol.cost - dual_value)},
              {"phi_outer", wow::scalars_to_json(sol.outer_duals.phi)},
              {"psi_outer", wow::scalars_to_json(sol.outer_duals.psi)},
              {"inner", inner}};
}

// ---- verify ---------------------------------------------------------------------

template <class S>
Json suite_coupling(const wow::Instance<S>& inst, const wow::RandomCoupling<S>& P,
                    const wow::Tolerances<S>& tol) {
  Json checks = Json::array();
  bool ok = true;
  const bool pushforward = wow::validate_random_coupling(P, inst.m1, inst.m2, tol.sum);
  checks.push_back(Json{{"name", "double_pushforward"}, {"passed", pushforward}});
  ok = ok && pushforward;

  bool feasible = true;
  std::string detail;
  for (std::size_t k = 0; k < P.size(); ++k) {
    try {
      wow::validate_coupling(P.atoms[k], tol.sum);
    } catch (const wow::Error& e) {
      feasible = false;
      detail = e.what();
      break;
    }
  }
  Json feas{{"name", "atoms_feasible"}, {"passed", feasible}};
  if (!feasible) feas["witness"] = detail;
  checks.push_back(feas);
  ok = ok && feasible;

  const auto eq71 = wow::verify_eq71(P, inst.cost, tol.gap);
  checks.push_back(Json{{"name", "marginal_inequality"},
                        {"passed", eq71.inequality_ok},
                        {"lhs", wow::to_double(eq71.lhs)},
                        {"rhs", wow::to_double(eq71.rhs)},
                        {"equality", eq71.equality}});
  ok = ok && eq71.inequality_ok;
  return Json{{"suite", "coupling"}, {"passed", ok}, {"checks", checks}};
}

template <class S>
Json suite_monotone(const wow::Instance<S>& inst, const wow::RandomCoupling<S>& P,
                    const wow::Tolerances<S>& tol) {
  Json checks = Json::array();
  bool ok = true;
  const auto total = wow::cert::check_total_monotone(P.atoms, inst.cost, 4, tol.gap);
  Json t{{"name", "total_cyclical_monotonicity"}, {"passed", total.passed}};
  if (!total.passed) {
    t["failed_clause"] = std::string(1, total.failed_clause);
    if (total.failed_clause == 'a') t["atom_index"] = total.atom_index;
    if (total.failed_clause == 'b')
      t["witness"] = wow::monotone_report_to_json(total.marginal_report);
  }
  checks.push_back(t);
  ok = ok && total.passed;

  const int N = std::min<int>(3, static_cast<int>(P.size()) + 1);
  const auto sampled = wow::cert::falsify_total_monotone_sampled(
      P.atoms, inst.cost, N, 200, inst.options.seed, tol.gap);
  Json s{{"name", "sampled_gluings"},
         {"passed", !sampled.falsified},
         {"comparisons", sampled.comparisons},
         {"note", sampled.note}};
  if (sampled.falsified && sampled.witness) {
    s["witness"] = Json{{"atoms", sampled.witness->atom_indices},
                        {"sigma", sampled.witness->sigma},
                        {"diagonal", wow::to_double(sampled.witness->diagonal)},
                        {"permuted", wow::to_double(sampled.witness->permuted)}};
  }
  checks.push_back(s);
  ok = ok && !sampled.falsified;
  return Json{{"suite", "monotone"}, {"passed", ok}, {"checks", checks}};
}

template <class S>
Json suite_potential(const wow::Instance<S>& inst, const wow::RandomCoupling<S>& P,
                     const wow::NestedSolution<S>& sol, const wow::Tolerances<S>& tol) {
  Json checks = Json::array();
  bool ok = true;
  S dual_value(0);
  for (std::size_t i = 0; i < inst.m1.size(); ++i)
    dual_value += sol.outer_duals.phi[i] * inst.m1.weights[i];
  for (std::size_t j = 0; j < inst.m2.size(); ++j)
    dual_value += sol.outer_duals.psi[j] * inst.m2.weights[j];
  const bool zero_gap = !(wow::abs_value(sol.cost - dual_value) > tol.gap);
  checks.push_back(Json{{"name", "dual_value_matches_cost"},
                        {"passed", zero_gap},
                        {"cost", wow::to_double(sol.cost)},
                        {"dual_value", wow::to_double(dual_value)}});
  ok = ok && zero_gap;

  const auto cert = wow::cert::check_superdifferential_certificate(
      P, sol.outer_duals.phi, sol.outer_duals.psi, inst.m1, inst.m2, inst.cost, tol.gap);
  Json atoms = Json::array();
  for (const auto& a : cert.atoms)
    atoms.push_back(Json{{"source_index", a.source_index},
                         {"target_index", a.target_index},
                         {"potential_sum", wow::to_double(a.potential_sum)},
                         {"plan_cost", wow::to_double(a.plan_cost)},
                         {"tight", a.tight}});
  checks.push_back(Json{{"name", "superdifferential_certificate"},
                        {"passed", cert.passed},
                        {"feasible", cert.feasible},
                        {"atoms", atoms}});
  ok = ok && cert.passed;
  return Json{{"suite", "potential"}, {"passed", ok}, {"checks", checks}};
}

template <class S>
Json suite_lifting(const wow::Instance<S>& inst, const wow::RandomCoupling<S>& P,
                   const wow::NestedSolution<S>& sol, const wow::Tolerances<S>& tol) {
  Json checks = Json::array();
  bool ok = true;

  bool roundtrip = true;
  for (const auto& mu : inst.m1.atoms)
    roundtrip = roundtrip && wow::measure_eq(wow::law(wow::lift_measure(mu)), mu, tol.sum);
  for (const auto& nu : inst.m2.atoms)
    roundtrip = roundtrip && wow::measure_eq(wow::law(wow::lift_measure(nu)), nu, tol.sum);
  checks.push_back(Json{{"name", "law_lift_roundtrip"}, {"passed", roundtrip}});
  ok = ok && roundtrip;

  bool realizable = true, bounded = true;
  S total(0);
  for (std::size_t k = 0; k < P.size(); ++k) {
    const auto Z1 = wow::lift_measure(P.atoms[k].source);
    const auto Z2 = wow::rearrange_to_coupling(Z1, P.atoms[k], tol.sum);
    const S lifted = wow::lifted_cost(Z1, Z2, inst.cost);
    const S planc = wow::plan_cost(P.atoms[k], inst.cost);
    if (wow::abs_value(lifted - planc) > tol.gap) realizable = false;
    const S inner_cost =
        wow::inner::solve(P.atoms[k].source, P.atoms[k].target, inst.cost).cost;
    if (inner_cost > lifted + tol.gap) bounded = false;
    total += P.weights[k] * lifted;
  }
  checks.push_back(Json{{"name", "rearrangement_reproduces_plan_cost"}, {"passed", realizable}});
  checks.push_back(Json{{"name", "lifted_cost_dominates_inner_cost"}, {"passed", bounded}});
  const bool reproduces = !(wow::abs_value(total - wow::random_coupling_cost(P, inst.cost)) >
                            tol.gap + tol.gap);
  checks.push_back(Json{{"name", "lifted_total_matches_objective"},
                        {"passed", reproduces},
                        {"lifted_total", wow::to_double(total)},
                        {"cost", wow::to_double(sol.cost)}});
  ok = ok && realizable && bounded && reproduces;
  return Json{{"suite", "lifting"}, {"passed", ok}, {"checks", checks}};
}

template <class S>
Json suite_monge(const wow::Instance<S>& inst, const wow::RandomCoupling<S>& P,
                 const wow::NestedSolution<S>& sol, const wow::Tolerances<S>& tol) {
  Json checks = Json::array();
  bool ok = true;

  const S pcost = wow::random_coupling_cost(P, inst.cost);
  const bool chain = !(sol.cost > pcost + tol.gap);
  checks.push_back(Json{{"name", "kantorovich_lower_bound"},
                        {"passed", chain},
                        {"coupling_cost", wow::to_double(pcost)},
                        {"kantorovich", wow::to_double(sol.cost)}});
  ok = ok && chain;

  const auto map = wow::monge::is_fully_deterministic(P, inst.m1, inst.m2, tol.sum);
  Json det{{"name", "fully_deterministic_roundtrip"}, {"fully_deterministic", map.has_value()}};
  if (map) {
    const auto rebuilt = wow::monge::make_random_coupling(*map, inst.m1);
    const S rebuilt_cost = wow::random_coupling_cost(rebuilt, inst.cost);
    const bool same = !(wow::abs_value(rebuilt_cost - pcost) > tol.gap);
    det["passed"] = same;
    ok = ok && same;
  } else {
    det["passed"] = true;
    det["note"] = "random coupling is not fully deterministic; nothing to check";
  }
  checks.push_back(det);

  try {
    const auto strict = wow::monge::strict_monge_equal_size(inst.m1, inst.m2, inst.cost);
    const bool small_gap = !(strict.gap > tol.gap);
    checks.push_back(Json{{"name", "strict_monge_gap"},
                          {"passed", small_gap},
                          {"value", wow::to_double(strict.value)},
                          {"gap", wow::to_double(strict.gap)}});
    ok = ok && small_gap;
  } catch (const wow::NotEqualSize&) {
    checks.push_back(Json{{"name", "strict_monge_gap"},
                          {"passed", true},
                          {"note", "instance outside the equal-size subclass; skipped"}});
  }
  return Json{{"suite", "monge"}, {"passed", ok}, {"checks", checks}};
}

template <class S>
Json run_verify(const CommonArgs& args, const std::vector<std::string>& suites,
                const std::string& plan_path, bool& verification_failed) {
  const auto inst = load_instance<S>(args);
  const auto tol = inst.tolerances();
  const auto sol = wow::solve_nested(inst.m1, inst.m2, inst.cost, inst.options.jobs);
  wow::RandomCoupling<S> P = sol.random_coupling;
  if (!plan_path.empty())
    P = wow::random_coupling_from_json<S>(wow::load_json_file(plan_path), inst.m1, inst.m2);

  Json out;
  out["suites"] = Json::array();
  bool all = true;
  for (const std::string& name : suites) {
    Json suite;
    if (name == "coupling") suite = suite_coupling(inst, P, tol);
    else if (name == "monotone") suite = suite_monotone(inst, P, tol);
    else if (name == "potential") suite = suite_potential(inst, P, sol, tol);
    else if (name == "lifting") suite = suite_lifting(inst, P, sol, tol);
    else if (name == "monge") suite = suite_monge(inst, P, sol, tol);
    else throw wow::ParseError("unknown suite: " + name);
    all = all && suite.at("passed").get<bool>();
    out["suites"].push_back(suite);
  }
  out["passed"] = all;
  verification_failed = !all;
  return out;
}

// ---- lift / monge / counterexample ----------------------------------------------

template <class S>
Json run_lift(const CommonArgs& args) {
  const auto inst = load_instance<S>(args);
  const auto tol = inst.tolerances();
  const auto sol = wow::solve_nested(inst.m1, inst.m2, inst.cost, inst.options.jobs);
  Json lifts1 = Json::array(), lifts2 = Json::array();
  for (const auto& mu : inst.m1.atoms) lifts1.push_back(wow::step_to_json(wow::lift_measure(mu)));
  for (const auto& nu : inst.m2.atoms) lifts2.push_back(wow::step_to_json(wow::lift_measure(nu)));
  Json cells = Json::array();
  S total(0);
  for (std::size_t k = 0; k < sol.random_coupling.size(); ++k) {
    const auto& pi = sol.random_coupling.atoms[k];
    const auto Z1 = wow::lift_measure(pi.source);
    const auto Z2 = wow::rearrange_to_coupling(Z1, pi, tol.sum);
    const S lifted = wow::lifted_cost(Z1, Z2, inst.cost);
    total += sol.random_coupling.weights[k] * lifted;
    cells.push_back(Json{{"source_index", sol.coupling_cells[k].first},
                         {"target_index", sol.coupling_cells[k].second},
                         {"weight", wow::to_double(sol.random_coupling.weights[k])},
                         {"lifted_cost", wow::to_double(lifted)},
                         {"plan_cost", wow::to_double(wow::plan_cost(pi, inst.cost))},
                         {"rearranged", wow::step_to_json(Z2)}});
  }
  return Json{{"cost", wow::to_double(sol.cost)},
              {"lifted_total", wow::to_double(total)},
              {"m1_lifts", lifts1},
              {"m2_lifts", lifts2},
              {"cells", cells}};
}

template <class S>
Json run_monge(const CommonArgs& args, bool pratelli, int levels, const std::string& csv_path) {
  const auto inst = load_instance<S>(args);
  if (pratelli) {
    const auto rows = wow::monge::pratelli_refinement_experiment(
        inst.m1, inst.m2, inst.cost, levels, inst.options.jobs);
    if (!csv_path.empty()) {
      const std::string csv = wow::pratelli_rows_to_csv(rows);
      if (csv_path == "-") {
        std::cout << csv;
      } else {
        std::ofstream out(csv_path);
        if (!out) throw wow::ParseError("cannot write " + csv_path);
        out << csv;
      }
    }
    return Json{{"experiment", "pratelli_refinement"},
                {"levels", levels},
                {"rows", wow::pratelli_rows_to_json(rows)}};
  }
  const auto strict = wow::monge::strict_monge_equal_size(inst.m1, inst.m2, inst.cost);
  Json images = Json::array();
  for (const auto& atom_images : strict.map.point_images) {
    Json a = Json::array();
    for (const auto& p : atom_images) a.push_back(wow::point_to_json(p));
    images.push_back(a);
  }
  return Json{{"value", wow::to_double(strict.value)},
              {"kantorovich", wow::to_double(strict.kantorovich_value)},
              {"gap", wow::to_double(strict.gap)},
              {"outer_assignment", strict.map.outer_assignment},
              {"point_images", images}};
}

Json run_counterexample(int grid, double p, const std::string& norm_name) {
  wow::Norm norm = wow::Norm::ell_inf;
  if (norm_name == "euclidean") norm = wow::Norm::euclidean;
  else if (norm_name == "ell_1") norm = wow::Norm::ell_1;
  else if (norm_name != "ell_inf") throw wow::ParseError("unknown norm: " + norm_name);
  const auto report = wow::monge::linfty_counterexample(grid, p, norm);
  return Json{{"grid", grid},
              {"p", p},
              {"norm", norm_name},
              {"cost_a", report.cost_a},
              {"cost_b", report.cost_b},
              {"plan_distance", report.plan_distance},
              {"optimal_a", report.optimal_a},
              {"optimal_b", report.optimal_b},
              {"plan_a", wow::matrix_to_json(report.plan_a.matrix)},
              {"plan_b", wow::matrix_to_json(report.plan_b.matrix)}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nested optimal transport between laws of random measures"};
  app.require_subcommand(1);

  CommonArgs dist_args, plan_args, pot_args, verify_args, lift_args, monge_args, ce_args;
  std::vector<std::string> suites;
  std::string plan_path;
  bool pratelli = false;
  int levels = 6;
  std::string csv_path;
  int ce_grid = 4;
  double ce_p = 2.0;
  std::string ce_norm = "ell_inf";

  auto* dist = app.add_subcommand("dist", "nested transport cost and distance");
  add_common(dist, dist_args);
  auto* plan = app.add_subcommand("plan", "full solution with the optimal random coupling");
  add_common(plan, plan_args);
  auto* potentials = app.add_subcommand("potentials", "optimal Kantorovich potentials");
  add_common(potentials, pot_args);
  auto* verify = app.add_subcommand("verify", "optimality certificates for a random coupling");
  add_common(verify, verify_args);
  verify->add_option("--suite", suites, "coupling|monotone|potential|lifting|monge")
      ->required()
      ->delimiter(',');
  verify->add_option("--plan", plan_path, "verify this solution JSON instead of re-solving");
  auto* lift = app.add_subcommand("lift", "step-function lifts and the lifted cost");
  add_common(lift, lift_args);
  auto* monge = app.add_subcommand("monge", "strict Monge maps and refinement experiments");
  add_common(monge, monge_args);
  monge->add_flag("--pratelli", pratelli, "run the refinement experiment");
  monge->add_option("--levels", levels, "refinement levels (1..8)");
  monge->add_option("--csv", csv_path, "write the experiment table as CSV ('-' for stdout)");
  auto* counterexample =
      app.add_subcommand("counterexample", "sup-norm non-uniqueness instance");
  add_common(counterexample, ce_args, false);
  counterexample->add_option("--grid", ce_grid, "grid resolution (even)")->required();
  counterexample->add_option("--p", ce_p, "cost exponent");
  counterexample->add_option("--norm", ce_norm, "ell_inf|euclidean|ell_1");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    Json report;
    CommonArgs* used = nullptr;
    bool verification_failed = false;
    const auto dispatch = [&](const CommonArgs& args, auto&& fn) {
      if (requested_mode(args) == "rational")
        return fn.template operator()<wow::Rational>();
      return fn.template operator()<double>();
    };
    if (dist->parsed()) {
      used = &dist_args;
      report = dispatch(dist_args, [&]<class S>() { return run_dist<S>(dist_args); });
    } else if (plan->parsed()) {
      used = &plan_args;
      report = dispatch(plan_args, [&]<class S>() { return run_plan<S>(plan_args); });
    } else if (potentials->parsed()) {
      used = &pot_args;
      report = dispatch(pot_args, [&]<class S>() { return run_potentials<S>(pot_args); });
    } else if (verify->parsed()) {
      used = &verify_args;
      if (suites.empty()) throw wow::ParseError("no suites requested");
      report = dispatch(verify_args, [&]<class S>() {
        return run_verify<S>(verify_args, suites, plan_path, verification_failed);
      });
    } else if (lift->parsed()) {
      used = &lift_args;
      report = dispatch(lift_args, [&]<class S>() { return run_lift<S>(lift_args); });
    } else if (monge->parsed()) {
      used = &monge_args;
      report = dispatch(monge_args, [&]<class S>() {
        return run_monge<S>(monge_args, pratelli, levels, csv_path);
      });
    } else if (counterexample->parsed()) {
      used = &ce_args;
      report = run_counterexample(ce_grid, ce_p, ce_norm);
    }
    if (used != nullptr) emit(report, *used);
    return verification_failed ? 1 : 0;
  } catch (const wow::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const wow::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const wow::NotEqualSize& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const wow::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
}
