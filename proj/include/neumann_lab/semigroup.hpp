#pragma once

// Heat semigroups e^{-tL} and resolvents (L + α)^{-1} of restricted operators.
//
// The spectral factorisation is taken of the bounded, symmetric operator
//   Z = M^{1/2} (M + γ L_sym)^{-1} M^{1/2},   0 ≤ Z ≤ 1,
// which shares its eigenvectors with S = M^{1/2} A M^{-1/2} and has
// eigenvalues z = 1/(1 + γλ). The inverse is formed by diagonally dominant
// M-matrix elimination, so Z is entrywise accurate even when edge weights span
// hundreds of orders of magnitude (the comb). Eigenvalues of S are recovered
// as λ = (1/z - 1)/γ; z = 0 is read as λ = ∞.

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <limits>
#include <memory>

#include "mmatrix.hpp"
#include "operators.hpp"

namespace nlab {

struct EngineOptions {
  // γ in Z = M^{1/2}(M + γL)^{-1}M^{1/2}.
  double gamma = 1.0;
  // Negative entries above -clamp·‖v‖_∞ are set to 0 for v ≥ 0.
  double clamp = 1e-12;
};

struct ResolventResult {
  VertexFunction solution;
  double alpha = 0.0;
  double residual_norm = 0.0;
  Eigen::VectorXd local;
};

namespace detail {

inline DiagonallyDominantFactorization shifted_factorization(const RestrictedOperator& op,
                                                             double shift) {
  return DiagonallyDominantFactorization(Eigen::MatrixXd(op.weights()),
                                         op.excess() + shift * op.measure());
}

inline std::size_t clamp_negatives(Eigen::VectorXd& u, double threshold) {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u[i] < 0.0 && u[i] >= -threshold) {
      u[i] = 0.0;
      ++count;
    }
  }
  return count;
}

}  // namespace detail

// (L + α)^{-1} for one fixed α, factorised once.
class ResolventSolver {
 public:
  ResolventSolver(const RestrictedOperator& op, double alpha)
      : op_(&op), alpha_(alpha), factor_(check(op, alpha)) {}

  double alpha() const { return alpha_; }

  // (L + α)u = f  ⇔  (L_sym + αM)u = M f.
  Eigen::VectorXd solve(const Eigen::VectorXd& f) const {
    return factor_.solve(op_->measure().cwiseProduct(f));
  }

  // ‖(L + α)u - f‖₂ in ℓ²(X_k, m).
  double residual(const Eigen::VectorXd& u, const Eigen::VectorXd& f) const {
    return op_->norm2(op_->apply(u) + alpha_ * u - f);
  }

 private:
  static DiagonallyDominantFactorization check(const RestrictedOperator& op, double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw DomainError("resolvent parameter alpha must be positive");
    return detail::shifted_factorization(op, alpha);
  }

  const RestrictedOperator* op_;
  double alpha_;
  DiagonallyDominantFactorization factor_;
};

class SemigroupEngine {
 public:
  explicit SemigroupEngine(RestrictedOperator op, EngineOptions opts = {})
      : op_(std::move(op)), opts_(opts), clamps_(std::make_unique<std::atomic<std::size_t>>(0)) {
    if (!(opts_.gamma > 0.0)) throw ParameterError("engine shift gamma must be positive");
    const Eigen::VectorXd root = op_.measure().cwiseSqrt();
    const DiagonallyDominantFactorization factor =
        detail::shifted_factorization(op_, 1.0 / opts_.gamma);
    z_ = root.asDiagonal() * factor.inverse() * root.asDiagonal();
    z_ /= opts_.gamma;
    z_ = 0.5 * (z_ + z_.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(z_);
    if (eig.info() != Eigen::Success) throw ConstructionError("eigendecomposition failed");
    vectors_ = eig.eigenvectors();
    zvalues_ = eig.eigenvalues().cwiseMax(0.0).cwiseMin(1.0);
    lambda_.resize(zvalues_.size());
    for (Eigen::Index i = 0; i < zvalues_.size(); ++i)
      lambda_[i] = zvalues_[i] > 0.0 ? (1.0 / zvalues_[i] - 1.0) / opts_.gamma
                                     : std::numeric_limits<double>::infinity();
    root_ = root;
  }

  const RestrictedOperator& op() const { return op_; }
  const EngineOptions& options() const { return opts_; }

  // Eigenvalues of L, ordered by decreasing z (ascending λ up to rounding).
  Eigen::VectorXd eigenvalues() const { return lambda_.reverse(); }

  // ‖V diag(z) Vᵀ - Z‖_F / ‖Z‖_F.
  double reconstruction_error() const {
    const Eigen::MatrixXd rebuilt = vectors_ * zvalues_.asDiagonal() * vectors_.transpose();
    return (rebuilt - z_).norm() / std::max(z_.norm(), std::numeric_limits<double>::min());
  }

  std::size_t clamp_count() const { return clamps_->load(); }

  Eigen::VectorXd heat(double t, const Eigen::VectorXd& v) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("heat semigroup requires t >= 0");
    if (v.size() != static_cast<Eigen::Index>(op_.size()))
      throw ParameterError("vector length does not match the operator");
    if (t == 0.0) return v;
    Eigen::VectorXd decay(lambda_.size());
    for (Eigen::Index i = 0; i < lambda_.size(); ++i)
      decay[i] = std::isinf(lambda_[i]) ? 0.0 : std::exp(-t * lambda_[i]);
    Eigen::VectorXd coeff = vectors_.transpose() * root_.cwiseProduct(v);
    Eigen::VectorXd u = (vectors_ * decay.cwiseProduct(coeff)).cwiseQuotient(root_);
    if ((v.array() >= 0.0).all())
      *clamps_ += detail::clamp_negatives(u, opts_.clamp * v.cwiseAbs().maxCoeff());
    return u;
  }

  VertexFunction heat_apply(double t, const VertexFunction& v) const {
    return op_.extend(heat(t, op_.restrict(v)));
  }

  Eigen::VectorXd resolvent(double alpha, const Eigen::VectorXd& f) const {
    return ResolventSolver(op_, alpha).solve(f);
  }

  ResolventResult resolvent_apply(double alpha, const VertexFunction& f) const {
    const ResolventSolver solver(op_, alpha);
    const Eigen::VectorXd local = op_.restrict(f);
    ResolventResult out;
    out.local = solver.solve(local);
    if ((local.array() >= 0.0).all())
      *clamps_ += detail::clamp_negatives(out.local, opts_.clamp * local.cwiseAbs().maxCoeff());
    out.alpha = alpha;
    out.residual_norm = solver.residual(out.local, local);
    out.solution = op_.extend(out.local);
    return out;
  }

 private:
  RestrictedOperator op_;
  EngineOptions opts_;
  Eigen::MatrixXd z_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd zvalues_;
  Eigen::VectorXd lambda_;
  Eigen::VectorXd root_;
  std::unique_ptr<std::atomic<std::size_t>> clamps_;
};

// Uniform step count with h‖A‖_∞ ≤ 0.02.
inline int oracle_steps(const RestrictedOperator& op, double t) {
  return std::max(1, static_cast<int>(std::ceil(t * op.row_norm() / 0.02)));
}

// Classical fourth-order Runge-Kutta for u' = -Au, u(0) = v.
inline Eigen::VectorXd heat_oracle(const RestrictedOperator& op, double t, const Eigen::VectorXd& v,
                                   int steps) {
  if (!(t >= 0.0)) throw DomainError("heat oracle requires t >= 0");
  if (steps < 1) throw ParameterError("heat oracle needs at least one step");
  const double h = t / steps;
  if (!(h * op.row_norm() < 0.5))
    throw ParameterError("heat oracle step too large: (t/steps)·‖L‖ must be below 0.5");
  Eigen::VectorXd u = v;
  if (t == 0.0) return u;
  for (int s = 0; s < steps; ++s) {
    const Eigen::VectorXd k1 = -op.apply(u);
    const Eigen::VectorXd k2 = -op.apply(u + 0.5 * h * k1);
    const Eigen::VectorXd k3 = -op.apply(u + 0.5 * h * k2);
    const Eigen::VectorXd k4 = -op.apply(u + h * k3);
    u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

inline VertexFunction heat_oracle(const RestrictedOperator& op, double t, const VertexFunction& v,
                                  int steps) {
  return op.extend(heat_oracle(op, t, op.restrict(v), steps));
}

// ψ(v) = Q(v) + α‖v - f/α‖².
inline double variational_value(const RestrictedOperator& op, double alpha, const Eigen::VectorXd& f,
                                const Eigen::VectorXd& v) {
  const Eigen::VectorXd d = v - f / alpha;
  return op.form(v) + alpha * op.inner_product(d, d);
}

inline double variational_value(const RestrictedOperator& op, double alpha, const VertexFunction& f,
                                const VertexFunction& v) {
  return variational_value(op, alpha, op.restrict(f), op.restrict(v));
}

}  // namespace nlab
