#pragma once

// Feller estimators, semigroup gaps, the minimum-principle bound, the edge
// condition constant and the uniform ℓ¹ bound for sup_t P_tφ.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "convergence.hpp"
#include "semigroup.hpp"

namespace nlab {

enum class VerdictHint { DecayObserved, FloorObserved };

inline const char* to_string(VerdictHint v) {
  return v == VerdictHint::DecayObserved ? "decay-observed" : "floor-observed";
}

struct FellerReport {
  double alpha = 0.0;
  VertexId source = 0;
  Restriction kind = Restriction::Dirichlet;
  std::vector<int> radii;
  // sup of R_α δ_x outside the hop ball of each radius; the last radius is
  // the eccentricity of x, where the region is empty.
  std::vector<double> sup_outside;
  double decay_ratio = 0.0;  // last nonvacuous sup over the first
  VerdictHint hint = VerdictHint::DecayObserved;
  ReferenceResult reference;
};

struct FellerOptions {
  Restriction kind = Restriction::Dirichlet;
  double tol = 1e-8;
  double decay_threshold = 1e-6;
};

// R_α δ_x with δ_x = 1_x / m(x), through the Dirichlet truncation limit or the
// largest Neumann truncation, and its decay profile over hop balls around x.
inline FellerReport feller_estimate(const Exhaustion& ex, double alpha, VertexId x,
                                    const FellerOptions& opt = {}) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  bool in_first = false;
  for (VertexId y : ex.level(0)) in_first = in_first || y == x;
  if (!in_first) throw ParameterError("source vertex must lie in the smallest exhaustion set");
  const double mx = ex.graph().measure(x);
  auto compute = [&](std::size_t k, Restriction kind) {
    const RestrictedOperator op = assemble(ex.graph(), ex.level(k), kind);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.size()));
    delta[static_cast<Eigen::Index>(*op.index_of(x))] = 1.0 / mx;
    return ResolventSolver(op, alpha).solve(delta);
  };

  FellerReport rep;
  rep.alpha = alpha;
  rep.source = x;
  rep.kind = opt.kind;
  if (opt.kind == Restriction::Dirichlet) {
    rep.reference = dirichlet_limit(
        ex, [&](std::size_t k) { return compute(k, Restriction::Dirichlet); }, opt.tol, 0);
  } else {
    const std::size_t last = ex.levels() - 1;
    ReferenceResult& r = rep.reference;
    r.kind = "neumann-self-consistent";
    r.level = last;
    r.tag = ex.tag(last);
    auto set = ex.level(last);
    r.domain.assign(set.begin(), set.end());
    r.measure = detail::level_measure(ex.graph(), set);
    r.values = compute(last, Restriction::Neumann);
    r.exact = detail::covers_graph(ex, last);
    if (last > 0) {
      const Eigen::VectorXd prev = compute(last - 1, Restriction::Neumann);
      const double d = (r.values - detail::pad(prev, set.size())).cwiseAbs().dot(r.measure);
      r.self_consistency = r.last_increment = d;
      r.increments.push_back(d);
      if (!r.exact && !(d < opt.tol))
        throw TruncationInsufficient("Neumann resolvent reference is not self-consistent (distance " +
                                         format_number(d) + ")",
                                     d);
    }
  }

  const ReferenceResult& ref = rep.reference;
  const auto dist = hop_distances(ex.graph(), ref.domain, x);
  int ecc = 0;
  for (const auto& [y, d] : dist) ecc = std::max(ecc, d);
  rep.sup_outside.assign(static_cast<std::size_t>(ecc) + 1, 0.0);
  for (std::size_t i = 0; i < ref.domain.size(); ++i) {
    const int d = dist.at(ref.domain[i]);
    const double v = ref.values[static_cast<Eigen::Index>(i)];
    for (int r = 0; r < d; ++r) rep.sup_outside[static_cast<std::size_t>(r)] = std::max(rep.sup_outside[static_cast<std::size_t>(r)], v);
  }
  for (int r = 0; r <= ecc; ++r) rep.radii.push_back(r);
  if (ecc > 0 && rep.sup_outside[0] > 0.0) {
    rep.decay_ratio = rep.sup_outside[static_cast<std::size_t>(ecc - 1)] / rep.sup_outside[0];
    rep.hint = rep.decay_ratio <= opt.decay_threshold ? VerdictHint::DecayObserved
                                                      : VerdictHint::FloorObserved;
  }
  return rep;
}

struct GapResult {
  VertexSet domain;
  Eigen::VectorXd values;  // (P_t^{(N,ref)} - P_t^{(D,ref)}) 1_x on the domain
  double min = 0.0, max = 0.0, at_source = 0.0;
  bool positive_everywhere = false;
  ReferenceResult dirichlet;

  VertexFunction function() const {
    VertexFunction f;
    for (std::size_t i = 0; i < domain.size(); ++i) f.set(domain[i], values[static_cast<Eigen::Index>(i)]);
    return f;
  }
};

// u_t = (P_t^{(N)} - P_t^{(D)}) 1_x with the Dirichlet truncation limit as
// P_t^{(D)} and the Neumann semigroup of the same truncation as P_t^{(N)}.
inline GapResult semigroup_gap(const Exhaustion& ex, double t, VertexId x, double tol = 1e-8,
                               const EngineOptions& engine = {}) {
  if (!(t > 0.0)) throw DomainError("semigroup gap requires t > 0");
  const VertexFunction one_x = VertexFunction::indicator(x);
  GapResult out;
  out.dirichlet = dirichlet_reference(ex, t, one_x, tol, std::nullopt, engine);
  const ReferenceResult neumann = neumann_reference(ex, out.dirichlet.level, t, one_x, std::nullopt, engine);
  out.domain = out.dirichlet.domain;
  out.values = neumann.values - out.dirichlet.values;
  out.min = out.values.minCoeff();
  out.max = out.values.maxCoeff();
  for (std::size_t i = 0; i < out.domain.size(); ++i)
    if (out.domain[i] == x) out.at_source = out.values[static_cast<Eigen::Index>(i)];
  if (out.min < -1e-10)
    throw InvariantViolation("semigroup gap is negative (" + format_number(out.min) + ")");
  out.positive_everywhere = out.min > 0.0;
  return out;
}

// e^{-t Deg(x)}.
inline double minimum_principle_lower_bound(const WeightedGraph& g, double t, VertexId x) {
  if (!(t >= 0.0)) throw DomainError("t must be nonnegative");
  return std::exp(-t * weighted_degree(g, x));
}

// max b(x, y) / (m(x) m(y)) over pairs inside the window; 0 for no pairs.
inline double ec_constant(const WeightedGraph& g, std::span<const VertexId> window) {
  std::unordered_set<VertexId> inside(window.begin(), window.end());
  double c = 0.0;
  for (VertexId x : window)
    for (const auto& nb : g.neighbors(x))
      if (inside.count(nb.id)) c = std::max(c, nb.weight / (g.measure(x) * g.measure(nb.id)));
  return c;
}

struct UniformL1Result {
  double value = 0.0;  // ‖max_{t∈grid} P_tφ - φ‖₁
  double bound = 0.0;  // T ‖Δφ‖₁
  double slack = 0.0;
};

// ‖max over the grid of P_{t,k}φ - φ‖₁ on X_k against T‖Δφ‖₁, grid = `points`
// equally spaced times in [0, T].
inline UniformL1Result uniform_l1_check(const WeightedGraph& g, std::span<const VertexId> set, double T,
                                        const VertexFunction& phi, int points = 64,
                                        Restriction kind = Restriction::Dirichlet,
                                        const EngineOptions& engine = {}) {
  if (!(T >= 0.0)) throw DomainError("T must be nonnegative");
  if (points < 1) throw ParameterError("grid needs at least one time");
  SemigroupEngine e(assemble(g, set, kind), engine);
  const Eigen::VectorXd v = e.op().restrict(phi);
  Eigen::VectorXd sup = v;
  for (int i = 1; i < points; ++i) {
    const double t = points == 1 ? T : T * i / (points - 1);
    sup = sup.cwiseMax(e.heat(t, v));
  }
  UniformL1Result out;
  out.value = e.op().norm1(sup - v);
  out.bound = T * lp_norm(g, formal_laplacian(g, phi), 1.0);
  out.slack = out.bound - out.value;
  if (out.value > out.bound + 1e-9)
    throw InvariantViolation("uniform l1 bound violated: " + format_number(out.value) + " > " +
                             format_number(out.bound));
  return out;
}

// ∫_0^{40/α} e^{-αt} P_t v dt by 4-point Gauss-Legendre on `panels` panels:
// [0, 10^{-6}·40/α] followed by geometrically growing panels, which resolves
// stiff modes e^{-λt} near t = 0.
inline Eigen::VectorXd laplace_resolvent(const SemigroupEngine& e, double alpha, const Eigen::VectorXd& v,
                                         int panels = 50) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (panels < 2) throw ParameterError("quadrature needs at least two panels");
  static const std::array<double, 4> nodes{-0.8611363115940526, -0.3399810435848563,
                                           0.3399810435848563, 0.8611363115940526};
  static const std::array<double, 4> weights{0.3478548451374538, 0.6521451548625461,
                                             0.6521451548625461, 0.3478548451374538};
  const double T = 40.0 / alpha;
  std::vector<double> edges{0.0};
  for (int i = 0; i < panels; ++i) edges.push_back(T * std::pow(1e-6, static_cast<double>(panels - 1 - i) / (panels - 1)));
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(v.size());
  for (int p = 0; p < panels; ++p) {
    const double a = edges[static_cast<std::size_t>(p)], b = edges[static_cast<std::size_t>(p) + 1];
    for (std::size_t q = 0; q < 4; ++q) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * nodes[q];
      sum += (0.5 * (b - a) * weights[q] * std::exp(-alpha * t)) * e.heat(t, v);
    }
  }
  return sum;
}

}  // namespace nlab
