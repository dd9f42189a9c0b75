#pragma once

// α-harmonic and resolvent checks on the comb: the decay rate along the
// bottom tooth and the majorant C·h for R_1 δ_{(0,0)}.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mmatrix.hpp"
#include "models.hpp"
#include "semigroup.hpp"

namespace nlab {

// h(k, n) = 2^{-nk} 4^{-n}.
inline double comb_majorant_profile(std::int64_t k, std::int64_t n) {
  return std::ldexp(1.0, static_cast<int>(-n * k - 2 * n));
}

// g(0, n) = 2 - 2^{-n}.
inline double comb_base_profile(std::int64_t n) { return 2.0 - std::ldexp(1.0, static_cast<int>(-n)); }

struct CombBetaResult {
  double beta = 0.0;
  double spread = 0.0;         // (max - min) / mean of the fitted ratios
  std::vector<double> ratios;  // u(k+1,0)/u(k,0) for k in [K/4, K/2]
  std::vector<double> base;    // u(0, n), n = 0..height
  bool base_increasing = true;
  bool base_below_profile = true;  // u(0,n) ≤ u(0,0)·g(0,n)/g(0,0)
};

namespace detail {

// Solution on tooth n of (Δ + α)u = 0 at k = 1..depth with u(0) = 1 and
// u(depth + 1) = 0; returns u(0..depth+1).
inline Eigen::VectorXd comb_tooth(std::int64_t n, int depth, double alpha) {
  if (n * (depth + 1) > 990) throw OverflowError("comb tooth weights leave the double range");
  const Eigen::Index size = depth;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd excess = Eigen::VectorXd::Constant(size, alpha);  // m(k,n) = 1 for k > 0
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  for (Eigen::Index i = 0; i + 1 < size; ++i) {
    const double b = std::ldexp(1.0, static_cast<int>(n * (i + 1)));  // edge (i+1, i+2)
    w(i, i + 1) = w(i + 1, i) = b;
  }
  rhs[0] = 1.0;                                                           // b((0,n),(1,n)) = 1
  excess[0] += 1.0;
  excess[size - 1] += std::ldexp(1.0, static_cast<int>(n * depth));  // closure edge
  Eigen::VectorXd u(depth + 2);
  u[0] = 1.0;
  u.segment(1, size) = DiagonallyDominantFactorization(w, excess).solve_nonnegative(rhs);
  u[depth + 1] = 0.0;
  return u;
}

}  // namespace detail

// Solves (Δ + 1)u = 0 on the comb truncated to teeth of length `depth` (closed
// by u = 0 beyond) and base height `height`, normalised by u(0,0) = 1: each
// tooth is a Dirichlet problem scaled by its base value, and the base values
// follow from flux balance at (0, n). The decay rate is the mean ratio
// u(k+1,0)/u(k,0) over k in [depth/4, depth/2].
inline CombBetaResult comb_beta_extraction(int depth, int height = 6, double spread_tol = 1e-9) {
  if (depth < 8) throw ParameterError("comb tooth depth must be at least 8");
  if (height < 0) throw ParameterError("base height must be nonnegative");
  CombBetaResult out;
  const Eigen::VectorXd tooth0 = detail::comb_tooth(0, depth, 1.0);
  double lo = 1e300, hi = 0.0, sum = 0.0;
  for (int k = depth / 4; k <= depth / 2; ++k) {
    const double r = tooth0[k + 1] / tooth0[k];
    out.ratios.push_back(r);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    sum += r;
  }
  out.beta = sum / static_cast<double>(out.ratios.size());
  out.spread = (hi - lo) / out.beta;

  double prev = 0.0, cur = 1.0;
  out.base.push_back(cur);
  for (int n = 0; n < height; ++n) {
    const Eigen::VectorXd tooth = detail::comb_tooth(n, std::min(depth, 990 / (n + 1) - 1), 1.0);
    const double m = std::ldexp(1.0, -n);
    double flux = (cur - cur * tooth[1]) + m * cur;
    if (n > 0) flux += std::ldexp(1.0, 2 * (n + 1)) * (cur - prev);
    const double next = cur + flux / std::ldexp(1.0, 2 * (n + 2));
    prev = cur;
    cur = next;
    out.base.push_back(cur);
    if (!(cur > prev)) out.base_increasing = false;
  }
  for (std::size_t n = 0; n < out.base.size(); ++n)
    if (out.base[n] > out.base[0] * comb_base_profile(static_cast<std::int64_t>(n)) / comb_base_profile(0))
      out.base_below_profile = false;

  if (!(out.spread <= spread_tol))
    throw TruncationInsufficient("comb tooth too short for a stable decay ratio (spread " +
                                     format_number(out.spread) + ")",
                                 out.spread);
  return out;
}

struct CombMajorantResult {
  std::int64_t j = 0;
  double C = 0.0;
  double max_excess = 0.0;  // max of u - C·h
  bool holds = false;
  VertexSet domain;
  Eigen::VectorXd values;
};

// R_1 δ_{(0,0)} on the Dirichlet truncation K_j against C·h with
// C = u(0,0)/h(0,0).
inline CombMajorantResult comb_feller_majorant(std::int64_t j, double alpha = 1.0, double slack = 1e-9) {
  const WeightedGraph comb = make_comb();
  const VertexSet set = comb_rectangle(j);
  const RestrictedOperator op = assemble_dirichlet(comb, set);
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(set.size()));
  const auto origin = static_cast<Eigen::Index>(*op.index_of(comb_id(0, 0)));
  delta[origin] = 1.0 / comb.measure(comb_id(0, 0));
  CombMajorantResult out;
  out.j = j;
  out.domain = set;
  out.values = ResolventSolver(op, alpha).solve(delta);
  out.C = out.values[origin] / comb_majorant_profile(0, 0);
  out.max_excess = -1e300;
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto [k, n] = comb_coords(set[i]);
    out.max_excess =
        std::max(out.max_excess, out.values[static_cast<Eigen::Index>(i)] - out.C * comb_majorant_profile(k, n));
  }
  out.holds = out.max_excess <= slack;
  return out;
}

}  // namespace nlab
