#pragma once

// Exhaustion experiments: truncation references for P_t^{(D)} and P_t^{(N)},
// Neumann convergence curves, Dirichlet/Neumann gaps and ℓ¹ mass defects.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "operators.hpp"
#include "parallel.hpp"
#include "semigroup.hpp"

namespace nlab {

struct ReferenceResult {
  std::string kind;  // "dirichlet-limit" or "neumann-self-consistent"
  VertexSet domain;
  Eigen::VectorXd values;
  Eigen::VectorXd measure;
  std::size_t level = 0;
  std::int64_t tag = 0;
  std::vector<std::int64_t> tags_used;
  std::vector<double> increments;
  double last_increment = 0.0;
  std::optional<double> self_consistency;
  bool exact = false;
  std::size_t clamp_count = 0;

  VertexFunction function() const {
    VertexFunction f;
    for (std::size_t i = 0; i < domain.size(); ++i) f.set(domain[i], values[static_cast<Eigen::Index>(i)]);
    return f;
  }
  double norm1() const { return values.cwiseAbs().dot(measure); }
};

namespace detail {

inline Eigen::VectorXd pad(const Eigen::VectorXd& v, std::size_t n) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  out.head(v.size()) = v;
  return out;
}

inline Eigen::VectorXd level_measure(const WeightedGraph& g, std::span<const VertexId> set) {
  Eigen::VectorXd m(static_cast<Eigen::Index>(set.size()));
  for (std::size_t i = 0; i < set.size(); ++i) m[static_cast<Eigen::Index>(i)] = g.measure(set[i]);
  return m;
}

inline void require_nonnegative(const VertexFunction& phi) {
  if (!phi.finitely_supported()) throw DomainError("initial datum must be finitely supported");
  if (!phi.nonnegative()) throw DomainError("initial datum must be nonnegative");
}

inline std::size_t first_level_with(const Exhaustion& ex, const VertexFunction& f) {
  const VertexSet support = f.support();
  auto k = ex.first_level_containing(support);
  if (!k) throw ParameterError("the exhaustion never contains the support of the initial datum");
  return *k;
}

inline bool covers_graph(const Exhaustion& ex, std::size_t k) {
  const auto n = ex.graph().size();
  return n && ex.level_size(k) == *n;
}

}  // namespace detail

// Monotone limit along the exhaustion of values computed on each level, with
// the ℓ¹(m) increment stopping rule. `compute(k)` returns the iterate on
// level k in the exhaustion's vertex order.
inline ReferenceResult dirichlet_limit(const Exhaustion& ex,
                                       const std::function<Eigen::VectorXd(std::size_t)>& compute,
                                       double tol, std::size_t start_level,
                                       double monotone_tol = 1e-11) {
  if (!(tol > 0.0)) throw ParameterError("reference tolerance must be positive");
  if (start_level >= ex.levels()) throw ParameterError("start level beyond the exhaustion");
  ReferenceResult out;
  out.kind = "dirichlet-limit";
  Eigen::VectorXd prev = compute(start_level);
  std::size_t k = start_level;
  out.tags_used.push_back(ex.tag(k));
  out.last_increment = std::numeric_limits<double>::infinity();
  bool done = detail::covers_graph(ex, k);
  out.exact = done;
  while (!done && k + 1 < ex.levels()) {
    ++k;
    const Eigen::VectorXd cur = compute(k);
    const Eigen::VectorXd diff = cur - detail::pad(prev, ex.level_size(k));
    const Eigen::Index worst = [&] {
      Eigen::Index i = 0;
      diff.minCoeff(&i);
      return i;
    }();
    if (diff.size() > 0 && diff[worst] < -monotone_tol)
      throw InvariantViolation("Dirichlet truncations are not monotone at level tag " +
                               std::to_string(ex.tag(k)) + " (decrease " +
                               format_number(-diff[worst]) + ")");
    const Eigen::VectorXd m = detail::level_measure(ex.graph(), ex.level(k));
    out.last_increment = diff.cwiseAbs().dot(m);
    out.increments.push_back(out.last_increment);
    out.tags_used.push_back(ex.tag(k));
    prev = cur;
    if (out.last_increment < tol) done = true;
    if (detail::covers_graph(ex, k)) done = out.exact = true;
  }
  if (!done)
    throw TruncationInsufficient("Dirichlet reference did not reach increment " + format_number(tol) +
                                     " within the exhaustion (last increment " +
                                     format_number(out.last_increment) + ")",
                                 out.last_increment);
  out.level = k;
  out.tag = ex.tag(k);
  auto level = ex.level(k);
  out.domain.assign(level.begin(), level.end());
  out.values = prev;
  out.measure = detail::level_measure(ex.graph(), level);
  return out;
}

// P_{t,k}^{(D)}φ for increasing k until the ℓ¹ increment drops below tol.
inline ReferenceResult dirichlet_reference(const Exhaustion& ex, double t, const VertexFunction& phi,
                                           double tol = 1e-8,
                                           std::optional<std::size_t> start_level = std::nullopt,
                                           const EngineOptions& opts = {}) {
  detail::require_nonnegative(phi);
  const std::size_t first = detail::first_level_with(ex, phi);
  const std::size_t start = std::max(first, start_level.value_or(first));
  std::size_t clamps = 0;
  auto compute = [&](std::size_t k) {
    SemigroupEngine e(assemble_dirichlet(ex.graph(), ex.level(k)), opts);
    Eigen::VectorXd u = e.heat(t, e.op().restrict(phi));
    clamps += e.clamp_count();
    return u;
  };
  ReferenceResult out = dirichlet_limit(ex, compute, tol, start);
  out.clamp_count = clamps;
  return out;
}

// P_{t,k}^{(N)}φ on the given level, with the distance to the previous level
// recorded as the self-consistency measure. If `tol` is given, a larger
// distance is an error.
inline ReferenceResult neumann_reference(const Exhaustion& ex, std::size_t level, double t,
                                         const VertexFunction& phi,
                                         std::optional<double> tol = std::nullopt,
                                         const EngineOptions& opts = {}) {
  if (level >= ex.levels()) throw ParameterError("reference level beyond the exhaustion");
  if (!phi.finitely_supported()) throw DomainError("initial datum must be finitely supported");
  if (detail::first_level_with(ex, phi) > level)
    throw ParameterError("reference level does not contain the initial datum");
  ReferenceResult out;
  out.kind = "neumann-self-consistent";
  out.level = level;
  out.tag = ex.tag(level);
  auto set = ex.level(level);
  out.domain.assign(set.begin(), set.end());
  out.measure = detail::level_measure(ex.graph(), set);
  SemigroupEngine e(assemble_neumann(ex.graph(), set), opts);
  out.values = e.heat(t, e.op().restrict(phi));
  out.clamp_count = e.clamp_count();
  out.tags_used.push_back(out.tag);
  out.exact = detail::covers_graph(ex, level);
  if (level > 0 && detail::first_level_with(ex, phi) < level) {
    SemigroupEngine prev(assemble_neumann(ex.graph(), ex.level(level - 1)), opts);
    const Eigen::VectorXd p = prev.heat(t, prev.op().restrict(phi));
    const double d = (out.values - detail::pad(p, set.size())).cwiseAbs().dot(out.measure);
    out.self_consistency = d;
    out.last_increment = d;
    out.increments.push_back(d);
    out.tags_used.insert(out.tags_used.begin(), ex.tag(level - 1));
    if (tol && !out.exact && !(d < *tol))
      throw TruncationInsufficient("Neumann reference is not self-consistent: distance " +
                                       format_number(d) + " between the two largest truncations",
                                   d);
  }
  return out;
}

struct ConvergenceReport {
  std::string experiment;
  std::string graph;
  std::string reference_kind;
  double t = 0.0;
  std::optional<double> alpha;
  double tol = 1e-8;
  VertexId vertex = 0;
  std::int64_t reference_tag = 0;
  std::size_t reference_size = 0;
  std::optional<double> reference_self_consistency;

  std::vector<std::int64_t> tags;
  std::vector<std::size_t> sizes;
  std::vector<double> l1_distance, l2_distance, pointwise_distance;
  std::vector<double> pairings;      // ⟨R_{α,k}^{(N)} f, f⟩
  std::vector<double> variational;   // ψ_{f,α,k}(R_{α,k}^{(N)} f)
  std::vector<double> dirichlet_mass;  // ‖P_{t,k}^{(D)}φ‖₁
  std::vector<double> bound;           // 2(‖φ‖₁ - ‖P_{t,k}^{(D)}φ‖₁)

  double phi_mass = 0.0;
  std::optional<double> defect;  // ‖φ‖₁ - ‖P^{(D)}_{ref}φ‖₁
  double floor = 0.0;            // smallest ℓ¹ distance over k
  double floor_threshold = 0.0;
  bool persistent_floor = false;
  bool decreasing = false;  // ℓ² distance strictly decreasing over the last four steps
  bool pairings_monotone = true;
  std::size_t clamp_count = 0;
};

// True if the last `steps` consecutive differences are all negative.
inline bool decreasing_in_last(const std::vector<double>& v, std::size_t steps) {
  if (v.size() < 2) return false;
  const std::size_t from = v.size() > steps ? v.size() - steps - 1 : 0;
  for (std::size_t i = from; i + 1 < v.size(); ++i)
    if (!(v[i + 1] < v[i])) return false;
  return true;
}

inline bool nonincreasing(const std::vector<double>& v, double tol) {
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    if (v[i + 1] > v[i] + tol * std::max(1.0, std::abs(v[i]))) return false;
  return true;
}

struct ExperimentOptions {
  std::optional<double> alpha;       // resolvent pairings with f
  std::optional<VertexFunction> f;   // defaults to φ
  std::optional<VertexId> vertex;    // pointwise distance; defaults to the first support vertex
  double tol = 1e-8;
  EngineOptions engine;
};

namespace detail {

struct LevelResult {
  Eigen::VectorXd neumann, dirichlet;
  double pairing = std::numeric_limits<double>::quiet_NaN();
  double variational = std::numeric_limits<double>::quiet_NaN();
  std::size_t clamps = 0;
};

inline ConvergenceReport run_levels(const std::string& name, const Exhaustion& ex, double t,
                                    const VertexFunction& phi, const ReferenceResult& ref,
                                    const ExperimentOptions& opt, bool with_dirichlet,
                                    std::vector<LevelResult>& levels,
                                    std::vector<Eigen::VectorXd>& embedded) {
  if (!(t >= 0.0)) throw DomainError("t must be nonnegative");
  std::unordered_map<VertexId, Eigen::Index> pos;
  for (std::size_t i = 0; i < ref.domain.size(); ++i) pos.emplace(ref.domain[i], static_cast<Eigen::Index>(i));
  for (std::size_t k = 0; k < ex.levels(); ++k) {
    for (VertexId x : ex.level(k))
      if (!pos.count(x))
        throw ParameterError("reference support does not cover truncation tag " +
                             std::to_string(ex.tag(k)));
    if (ref.domain.size() <= ex.level_size(k) && !ref.exact && ref.kind != "dirichlet-limit")
      throw ParameterError("reference truncation must be strictly larger than every iterate");
  }
  ConvergenceReport rep;
  rep.experiment = name;
  rep.graph = ex.graph().name();
  rep.reference_kind = ref.kind;
  rep.t = t;
  rep.alpha = opt.alpha;
  rep.tol = opt.tol;
  rep.reference_tag = ref.tag;
  rep.reference_size = ref.domain.size();
  rep.reference_self_consistency = ref.self_consistency;
  const VertexSet support = phi.support();
  if (support.empty()) throw DomainError("initial datum must not vanish");
  rep.vertex = opt.vertex.value_or(support.front());
  if (!pos.count(rep.vertex)) throw ParameterError("designated vertex outside the reference domain");
  const Eigen::Index vx = pos.at(rep.vertex);

  levels.assign(ex.levels(), {});
  const VertexFunction f = opt.f.value_or(phi);
  parallel_for(ex.levels(), [&](std::size_t k) {
    LevelResult& r = levels[k];
    SemigroupEngine n(assemble_neumann(ex.graph(), ex.level(k)), opt.engine);
    r.neumann = n.heat(t, n.op().restrict(phi));
    if (opt.alpha) {
      const Eigen::VectorXd fl = n.op().restrict(f);
      const Eigen::VectorXd u = n.resolvent(*opt.alpha, fl);
      r.pairing = n.op().inner_product(u, fl);
      r.variational = variational_value(n.op(), *opt.alpha, fl, u);
    }
    r.clamps = n.clamp_count();
    if (with_dirichlet) {
      SemigroupEngine d(assemble_dirichlet(ex.graph(), ex.level(k)), opt.engine);
      r.dirichlet = d.heat(t, d.op().restrict(phi));
      r.clamps += d.clamp_count();
    }
  });

  embedded.assign(ex.levels(), {});
  rep.clamp_count = ref.clamp_count;
  for (std::size_t k = 0; k < ex.levels(); ++k) {
    const LevelResult& r = levels[k];
    Eigen::VectorXd e = Eigen::VectorXd::Zero(ref.values.size());
    auto set = ex.level(k);
    for (std::size_t i = 0; i < set.size(); ++i) e[pos.at(set[i])] = r.neumann[static_cast<Eigen::Index>(i)];
    const Eigen::VectorXd d = e - ref.values;
    rep.tags.push_back(ex.tag(k));
    rep.sizes.push_back(set.size());
    rep.l1_distance.push_back(d.cwiseAbs().dot(ref.measure));
    rep.l2_distance.push_back(std::sqrt(d.cwiseAbs2().dot(ref.measure)));
    rep.pointwise_distance.push_back(std::abs(d[vx]));
    if (opt.alpha) {
      rep.pairings.push_back(r.pairing);
      rep.variational.push_back(r.variational);
    }
    rep.clamp_count += r.clamps;
    if (with_dirichlet) {
      double over = 0.0;
      for (std::size_t i = 0; i < set.size(); ++i) {
        const auto li = static_cast<Eigen::Index>(i);
        const double cap = std::min(r.neumann[li], ref.values[pos.at(set[i])]);
        over = std::max(over, r.dirichlet[li] - cap);
      }
      if (over > 1e-10)
        throw InvariantViolation("sandwich P^(D)_k <= min(P^(N)_k, P^(D)_ref) violated by " +
                                 format_number(over) + " at truncation tag " +
                                 std::to_string(ex.tag(k)));
      rep.dirichlet_mass.push_back(r.dirichlet.dot(level_measure(ex.graph(), set)));
    }
    embedded[k] = std::move(e);
  }
  rep.decreasing = decreasing_in_last(rep.l2_distance, 4);
  rep.pairings_monotone = nonincreasing(rep.pairings, 1e-10);
  rep.floor = *std::min_element(rep.l1_distance.begin(), rep.l1_distance.end());
  rep.floor_threshold = std::max(10.0 * opt.tol, 1e-6);
  rep.persistent_floor = rep.floor > rep.floor_threshold;
  rep.phi_mass = lp_norm(ex.graph(), phi, 1.0);
  return rep;
}

}  // namespace detail

// Distances of P_{t,k}^{(N)}φ (extended by zero) to a reference, per level.
inline ConvergenceReport neumann_convergence_experiment(const Exhaustion& ex, double t,
                                                        const VertexFunction& phi,
                                                        const ReferenceResult& reference,
                                                        const ExperimentOptions& opt = {}) {
  std::vector<detail::LevelResult> levels;
  std::vector<Eigen::VectorXd> embedded;
  return detail::run_levels("neumann-convergence", ex, t, phi, reference, opt, false, levels, embedded);
}

// Distances of P_{t,k}^{(N)}φ to the Dirichlet reference, together with the
// sandwich P_{t,k}^{(D)}φ ≤ min(P_{t,k}^{(N)}φ, P^{(D)}_{ref}φ).
inline ConvergenceReport dirichlet_gap_experiment(const Exhaustion& ex, double t,
                                                  const VertexFunction& phi,
                                                  const ReferenceResult& dirichlet_ref,
                                                  const ExperimentOptions& opt = {}) {
  detail::require_nonnegative(phi);
  if (phi.support().empty()) throw DomainError("initial datum must not vanish");
  std::vector<detail::LevelResult> levels;
  std::vector<Eigen::VectorXd> embedded;
  return detail::run_levels("dirichlet-gap", ex, t, phi, dirichlet_ref, opt, true, levels, embedded);
}

// ℓ¹ distances d_k = ‖P_{t,k}^{(N)}φ - P^{(D)}_{ref}φ‖₁ with the bounds
// ‖φ‖₁ - ‖P^{(D)}_{ref}φ‖₁ ≤ d_k ≤ 2(‖φ‖₁ - ‖P_{t,k}^{(D)}φ‖₁).
inline ConvergenceReport l1_defect_experiment(const Exhaustion& ex, double t,
                                              const VertexFunction& phi,
                                              const ReferenceResult& dirichlet_ref,
                                              const ExperimentOptions& opt = {}) {
  for (VertexId x : dirichlet_ref.domain)
    if (ex.graph().killing(x) != 0.0)
      throw DomainError("the l1 defect experiment requires c = 0 (vertex " + ex.graph().label(x) + ")");
  ConvergenceReport rep = dirichlet_gap_experiment(ex, t, phi, dirichlet_ref, opt);
  rep.experiment = "l1-defect";
  rep.defect = rep.phi_mass - dirichlet_ref.norm1();
  for (std::size_t k = 0; k < rep.tags.size(); ++k) {
    rep.bound.push_back(2.0 * (rep.phi_mass - rep.dirichlet_mass[k]));
    if (rep.l1_distance[k] > rep.bound[k] + 1e-9)
      throw InvariantViolation("d_k exceeds 2(|phi|_1 - |P^(D)_k phi|_1) at truncation tag " +
                               std::to_string(rep.tags[k]));
    if (rep.l1_distance[k] < *rep.defect - 1e-9)
      throw InvariantViolation("d_k is below the stochastic defect at truncation tag " +
                               std::to_string(rep.tags[k]));
  }
  return rep;
}

}  // namespace nlab
