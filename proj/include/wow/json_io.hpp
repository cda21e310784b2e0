#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "wow/certificates.hpp"
#include "wow/lifting.hpp"
#include "wow/measure.hpp"
#include "wow/monge.hpp"
#include "wow/outer_ot.hpp"

namespace wow {

using Json = nlohmann::ordered_json;

// ---- scalars ----------------------------------------------------------------

template <class S>
S scalar_from_json(const Json& j) {
  if (j.is_number()) return scalar_from_double<S>(j.get<double>());
  if (j.is_string()) return parse_scalar<S>(j.get<std::string>());
  throw ParseError("expected a number or a numeric string");
}

inline Json scalar_to_json(double x) { return Json(x); }
inline Json scalar_to_json(const Rational& x) { return Json(to_double(x)); }

// ---- core schema --------------------------------------------------------------

template <class S>
Point<S> point_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw ParseError("point must be a non-empty array");
  Point<S> p;
  for (const auto& c : j) p.coords.push_back(scalar_from_json<S>(c));
  return p;
}

template <class S>
Json point_to_json(const Point<S>& p) {
  Json j = Json::array();
  for (const S& c : p.coords) j.push_back(scalar_to_json(c));
  return j;
}

template <class S>
DiscreteMeasure<S> discrete_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("weights"))
    throw ParseError("measure requires \"atoms\" and \"weights\"");
  DiscreteMeasure<S> m;
  for (const auto& a : j.at("atoms")) m.atoms.push_back(point_from_json<S>(a));
  for (const auto& w : j.at("weights")) m.weights.push_back(scalar_from_json<S>(w));
  if (m.atoms.size() != m.weights.size()) throw ParseError("atom/weight count mismatch");
  return m;
}

template <class S>
Json discrete_to_json(const DiscreteMeasure<S>& m) {
  Json atoms = Json::array(), weights = Json::array();
  for (const auto& a : m.atoms) atoms.push_back(point_to_json(a));
  for (const auto& w : m.weights) weights.push_back(scalar_to_json(w));
  return Json{{"atoms", atoms}, {"weights", weights}};
}

template <class S>
NestedMeasure<S> nested_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("weights"))
    throw ParseError("nested measure requires \"atoms\" and \"weights\"");
  NestedMeasure<S> m;
  for (const auto& a : j.at("atoms")) m.atoms.push_back(discrete_from_json<S>(a));
  for (const auto& w : j.at("weights")) m.weights.push_back(scalar_from_json<S>(w));
  if (m.atoms.size() != m.weights.size()) throw ParseError("atom/weight count mismatch");
  return m;
}

template <class S>
Json nested_to_json(const NestedMeasure<S>& m) {
  Json atoms = Json::array(), weights = Json::array();
  for (const auto& a : m.atoms) atoms.push_back(discrete_to_json(a));
  for (const auto& w : m.weights) weights.push_back(scalar_to_json(w));
  return Json{{"atoms", atoms}, {"weights", weights}};
}

inline CostSpec cost_spec_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("p") || !j.contains("norm"))
    throw ParseError("cost requires \"p\" and \"norm\"");
  CostSpec c;
  c.p = j.at("p").get<double>();
  const Json& n = j.at("norm");
  if (n.is_string()) {
    const std::string name = n.get<std::string>();
    if (name == "euclidean") c.norm = Norm::euclidean;
    else if (name == "ell_1") c.norm = Norm::ell_1;
    else if (name == "ell_inf") c.norm = Norm::ell_inf;
    else throw ParseError("unknown norm: " + name);
  } else if (n.is_object() && n.contains("ell_q")) {
    c.norm = Norm::ell_q;
    c.q = n.at("ell_q").get<double>();
  } else {
    throw ParseError("norm must be a name or {\"ell_q\": q}");
  }
  try {
    validate_cost_spec(c);
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  return c;
}

inline Json cost_spec_to_json(const CostSpec& c) {
  Json norm;
  switch (c.norm) {
    case Norm::euclidean: norm = "euclidean"; break;
    case Norm::ell_1: norm = "ell_1"; break;
    case Norm::ell_inf: norm = "ell_inf"; break;
    case Norm::ell_q: norm = Json{{"ell_q", c.q}}; break;
  }
  return Json{{"p", c.p}, {"norm", norm}};
}

// ---- instances ----------------------------------------------------------------

struct InstanceOptions {
  std::string mode = "float";
  std::optional<double> tol;
  std::optional<double> tol_sum;
  std::optional<double> tol_feas;
  std::optional<double> tol_gap;
  std::uint64_t seed = 0;
  int jobs = 1;
};

template <class S>
struct Instance {
  NestedMeasure<S> m1;
  NestedMeasure<S> m2;
  CostSpec cost;
  InstanceOptions options;

  Tolerances<S> tolerances() const {
    Tolerances<S> t = default_tolerances<S>();
    const auto apply = [&](const std::optional<double>& v, S& slot) {
      if (v) slot = scalar_from_double<S>(*v);
    };
    apply(options.tol, t.sum);
    apply(options.tol, t.feas);
    apply(options.tol, t.gap);
    apply(options.tol_sum, t.sum);
    apply(options.tol_feas, t.feas);
    apply(options.tol_gap, t.gap);
    return t;
  }
};

inline InstanceOptions options_from_json(const Json& j) {
  InstanceOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) throw ParseError("options must be an object");
  if (j.contains("mode")) {
    o.mode = j.at("mode").get<std::string>();
    if (o.mode != "float" && o.mode != "rational")
      throw ParseError("mode must be \"float\" or \"rational\"");
  }
  const auto grab = [&](const char* key, std::optional<double>& slot) {
    if (j.contains(key)) slot = j.at(key).get<double>();
  };
  grab("tol", o.tol);
  grab("tol_sum", o.tol_sum);
  grab("tol_feas", o.tol_feas);
  grab("tol_gap", o.tol_gap);
  if (j.contains("seed")) o.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("jobs")) o.jobs = j.at("jobs").get<int>();
  return o;
}

/// Parses an instance file; the measures come back canonicalized.
template <class S>
Instance<S> instance_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("m1") || !j.contains("m2") || !j.contains("cost"))
    throw ParseError("instance requires \"m1\", \"m2\" and \"cost\"");
  Instance<S> inst;
  inst.m1 = canonicalize_deep(nested_from_json<S>(j.at("m1")));
  inst.m2 = canonicalize_deep(nested_from_json<S>(j.at("m2")));
  inst.cost = cost_spec_from_json(j.at("cost"));
  inst.options = options_from_json(j.contains("options") ? j.at("options") : Json());
  return inst;
}

inline Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

// ---- solutions and reports -----------------------------------------------------

template <class S>
Json matrix_to_json(const Matrix<S>& m) {
  Json rows = Json::array();
  for (const auto& row : m) {
    Json r = Json::array();
    for (const S& x : row) r.push_back(scalar_to_json(x));
    rows.push_back(r);
  }
  return rows;
}

template <class S>
Json scalars_to_json(const std::vector<S>& v) {
  Json a = Json::array();
  for (const S& x : v) a.push_back(scalar_to_json(x));
  return a;
}

template <class S>
Json inner_solution_to_json(const InnerSolution<S>& sol) {
  Json j{{"cost", scalar_to_json(sol.cost)},
         {"plan", matrix_to_json(sol.plan.matrix)},
         {"phi", scalars_to_json(sol.duals.phi)},
         {"psi", scalars_to_json(sol.duals.psi)}};
  if constexpr (is_exact_v<S>) j["cost_exact"] = rational_to_string(sol.cost);
  return j;
}

template <class S>
Json nested_solution_to_json(const NestedSolution<S>& sol) {
  Json coupling = Json::array();
  for (std::size_t k = 0; k < sol.random_coupling.size(); ++k) {
    coupling.push_back(Json{{"weight", scalar_to_json(sol.random_coupling.weights[k])},
                            {"plan", matrix_to_json(sol.random_coupling.atoms[k].matrix)},
                            {"source_index", sol.coupling_cells[k].first},
                            {"target_index", sol.coupling_cells[k].second}});
  }
  Json j{{"cost", scalar_to_json(sol.cost)},
         {"outer_plan", matrix_to_json(sol.outer_plan.matrix)},
         {"phi_outer", scalars_to_json(sol.outer_duals.phi)},
         {"psi_outer", scalars_to_json(sol.outer_duals.psi)},
         {"random_coupling", coupling}};
  if constexpr (is_exact_v<S>) j["cost_exact"] = rational_to_string(sol.cost);
  return j;
}

/// Reads a random coupling serialized by nested_solution_to_json back against
/// the instance's canonical atoms.
template <class S>
RandomCoupling<S> random_coupling_from_json(const Json& j, const NestedMeasure<S>& M1,
                                            const NestedMeasure<S>& M2) {
  if (!j.is_object() || !j.contains("random_coupling"))
    throw ParseError("expected a solution object with \"random_coupling\"");
  RandomCoupling<S> P;
  for (const auto& atom : j.at("random_coupling")) {
    const int i = atom.at("source_index").get<int>();
    const int jdx = atom.at("target_index").get<int>();
    if (i < 0 || i >= static_cast<int>(M1.size()) || jdx < 0 ||
        jdx >= static_cast<int>(M2.size()))
      throw ParseError("random coupling atom indexes outside the instance");
    Coupling<S> pi;
    pi.source = M1.atoms[i];
    pi.target = M2.atoms[jdx];
    for (const auto& row : atom.at("plan")) {
      std::vector<S> r;
      for (const auto& x : row) r.push_back(scalar_from_json<S>(x));
      pi.matrix.push_back(std::move(r));
    }
    if (pi.matrix.size() != pi.source.size() ||
        (pi.matrix.size() && pi.matrix[0].size() != pi.target.size()))
      throw ParseError("plan shape does not match the indexed atoms");
    P.atoms.push_back(std::move(pi));
    P.weights.push_back(scalar_from_json<S>(atom.at("weight")));
  }
  if (P.atoms.empty()) throw ParseError("random coupling without atoms");
  return P;
}

template <class S>
Json monotone_report_to_json(const MonotoneReport<S>& r) {
  Json j{{"passed", r.passed},
         {"cycles_checked", r.cycles_checked},
         {"exhaustive", r.exhaustive}};
  if (!r.note.empty()) j["note"] = r.note;
  if (r.witness) {
    j["witness"] = Json{{"cycle", r.witness->cycle},
                        {"shifted", scalar_to_json(r.witness->shifted)},
                        {"diagonal", scalar_to_json(r.witness->diagonal)}};
  }
  return j;
}

template <class S>
Json pratelli_rows_to_json(const std::vector<monge::PratelliRow<S>>& rows) {
  Json a = Json::array();
  for (const auto& r : rows)
    a.push_back(Json{{"level", r.level},
                     {"kantorovich", scalar_to_json(r.kantorovich)},
                     {"strict_monge", scalar_to_json(r.strict_monge)},
                     {"gap", scalar_to_json(r.gap)}});
  return a;
}

template <class S>
std::string pratelli_rows_to_csv(const std::vector<monge::PratelliRow<S>>& rows) {
  std::ostringstream out;
  out << "level,kantorovich,strict_monge,gap\n";
  out.precision(17);
  for (const auto& r : rows)
    out << r.level << ',' << to_double(r.kantorovich) << ',' << to_double(r.strict_monge)
        << ',' << to_double(r.gap) << '\n';
  return out.str();
}

template <class S>
Json step_to_json(const StepRandomVariable<S>& Z) {
  Json breakpoints = Json::array();
  for (const S& b : Z.partition.breakpoints) breakpoints.push_back(scalar_to_json(b));
  Json values = Json::array();
  for (const auto& v : Z.values) values.push_back(point_to_json(v));
  return Json{{"breakpoints", breakpoints}, {"values", values}};
}

template <class S>
StepRandomVariable<S> step_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
    throw ParseError("step variable requires \"breakpoints\" and \"values\"");
  StepRandomVariable<S> Z;
  for (const auto& b : j.at("breakpoints"))
    Z.partition.breakpoints.push_back(scalar_from_json<S>(b));
  for (const auto& v : j.at("values")) Z.values.push_back(point_from_json<S>(v));
  validate_step(Z);
  return Z;
}

}  // namespace wow
