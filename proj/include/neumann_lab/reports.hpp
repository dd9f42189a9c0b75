#pragma once

// CSV, tidy CSV and JSON serialisation of experiment reports.

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "birth_death.hpp"
#include "comb.hpp"
#include "convergence.hpp"

namespace nlab {

using Json = nlohmann::ordered_json;

// Fixed column order for convergence CSV files.
inline const std::vector<std::string>& convergence_csv_columns() {
  static const std::vector<std::string> cols{"k",        "tag",     "size",        "l1_distance",
                                             "l2_distance", "pointwise_distance", "pairing",
                                             "variational", "dirichlet_mass", "bound"};
  return cols;
}

namespace detail {

inline void put(std::ostream& out, double v) {
  if (std::isnan(v)) out << "";
  else out << v;
}

inline double at_or_nan(const std::vector<double>& v, std::size_t k) {
  return k < v.size() ? v[k] : std::numeric_limits<double>::quiet_NaN();
}

// JSON has no infinities or NaN; they become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace detail

inline void write_csv(std::ostream& out, const ConvergenceReport& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  const auto& cols = convergence_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (std::size_t k = 0; k < r.tags.size(); ++k) {
    out << k << ',' << r.tags[k] << ',' << r.sizes[k];
    for (const auto* col : {&r.l1_distance, &r.l2_distance, &r.pointwise_distance, &r.pairings,
                            &r.variational, &r.dirichlet_mass, &r.bound}) {
      out << ',';
      detail::put(out, detail::at_or_nan(*col, k));
    }
    out << '\n';
  }
}

inline void write_tidy_csv(std::ostream& out, const ConvergenceReport& r) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "k,metric,value\n";
  const std::vector<std::pair<std::string, const std::vector<double>*>> metrics{
      {"l1_distance", &r.l1_distance}, {"l2_distance", &r.l2_distance},
      {"pointwise_distance", &r.pointwise_distance}, {"pairing", &r.pairings},
      {"variational", &r.variational}, {"dirichlet_mass", &r.dirichlet_mass}, {"bound", &r.bound}};
  for (std::size_t k = 0; k < r.tags.size(); ++k)
    for (const auto& [name, col] : metrics)
      if (k < col->size()) out << r.tags[k] << ',' << name << ',' << (*col)[k] << '\n';
}

inline Json to_json(const ReferenceResult& r) {
  Json j;
  j["kind"] = r.kind;
  j["tag"] = r.tag;
  j["size"] = r.domain.size();
  j["tags_used"] = r.tags_used;
  j["increments"] = detail::numbers(r.increments);
  j["last_increment"] = detail::number(r.last_increment);
  j["self_consistency"] = r.self_consistency ? detail::number(*r.self_consistency) : Json(nullptr);
  j["exact"] = r.exact;
  j["clamp_count"] = r.clamp_count;
  return j;
}

inline Json to_json(const ConvergenceReport& r) {
  Json j;
  j["experiment"] = r.experiment;
  j["graph"] = r.graph;
  j["t"] = r.t;
  j["alpha"] = r.alpha ? Json(*r.alpha) : Json(nullptr);
  j["tol"] = r.tol;
  j["vertex"] = r.vertex;
  j["reference"] = {{"kind", r.reference_kind},
                    {"tag", r.reference_tag},
                    {"size", r.reference_size},
                    {"self_consistency", r.reference_self_consistency
                                             ? detail::number(*r.reference_self_consistency)
                                             : Json(nullptr)}};
  j["tags"] = r.tags;
  j["sizes"] = r.sizes;
  j["l1_distance"] = detail::numbers(r.l1_distance);
  j["l2_distance"] = detail::numbers(r.l2_distance);
  j["pointwise_distance"] = detail::numbers(r.pointwise_distance);
  j["pairings"] = detail::numbers(r.pairings);
  j["variational"] = detail::numbers(r.variational);
  j["dirichlet_mass"] = detail::numbers(r.dirichlet_mass);
  j["bound"] = detail::numbers(r.bound);
  j["phi_mass"] = r.phi_mass;
  j["defect"] = r.defect ? detail::number(*r.defect) : Json(nullptr);
  j["floor"] = detail::number(r.floor);
  j["floor_threshold"] = r.floor_threshold;
  j["persistent_floor"] = r.persistent_floor;
  j["decreasing"] = r.decreasing;
  j["pairings_monotone"] = r.pairings_monotone;
  j["clamp_count"] = r.clamp_count;
  return j;
}

inline Json to_json(const FellerReport& r) {
  Json j;
  j["alpha"] = r.alpha;
  j["source"] = r.source;
  j["restriction"] = to_string(r.kind);
  j["radii"] = r.radii;
  j["sup_outside"] = detail::numbers(r.sup_outside);
  j["decay_ratio"] = detail::number(r.decay_ratio);
  j["verdict_hint"] = to_string(r.hint);
  j["reference"] = to_json(r.reference);
  return j;
}

inline Json to_json(const GapResult& r, const WeightedGraph& g) {
  Json j;
  j["min"] = r.min;
  j["max"] = r.max;
  j["at_source"] = r.at_source;
  j["positive_everywhere"] = r.positive_everywhere;
  j["reference"] = to_json(r.dirichlet);
  Json values = Json::object();
  for (std::size_t i = 0; i < r.domain.size(); ++i)
    values[g.label(r.domain[i])] = r.values[static_cast<Eigen::Index>(i)];
  j["values"] = values;
  return j;
}

inline Json to_json(const SeriesRecord& s) {
  Json j;
  j["verdict"] = to_string(s.verdict);
  j["method"] = s.method.empty() ? Json(nullptr) : Json(s.method);
  j["partial_sum"] = s.partial.empty() ? Json(nullptr) : detail::number(s.partial.back());
  return j;
}

inline Json to_json(const BdClassification& c) {
  Json j;
  j["horizon"] = c.horizon;
  j["measure_total"] = c.measure_infinite ? Json("inf")
                       : c.measure_total  ? Json(*c.measure_total)
                                          : Json(nullptr);
  j["measure_total_estimated"] = c.measure_total_estimated;
  j["series"] = {{"measure", to_json(c.measure)},
                 {"inv_b", to_json(c.inv_b)},
                 {"tail", to_json(c.tail)},
                 {"hamburger", to_json(c.hamburger)}};
  j["neumann_feller"] = to_string(c.neumann_feller);
  j["nontrivial_l1_harmonic_exists"] = to_string(c.nontrivial_l1_harmonic_exists);
  j["ess_self_adjoint"] = to_string(c.ess_self_adjoint);
  j["hamburger_consistent"] = to_string(c.hamburger_consistent);
  return j;
}

inline Json to_json(const CombBetaResult& r) {
  Json j;
  j["beta"] = r.beta;
  j["spread"] = r.spread;
  j["ratios"] = r.ratios;
  j["base"] = r.base;
  j["base_increasing"] = r.base_increasing;
  j["base_below_profile"] = r.base_below_profile;
  return j;
}

inline Json to_json(const UniformL1Result& r) {
  return {{"value", r.value}, {"bound", r.bound}, {"slack", r.slack}};
}

}  // namespace nlab
