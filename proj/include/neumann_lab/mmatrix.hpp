#pragma once

// Entrywise-accurate LDLᵀ factorisation of symmetric, diagonally dominant
// M-matrices K = diag(s + W·1) - W, parametrised by the off-diagonal
// magnitudes W ≥ 0 and the row excess s ≥ 0.
//
// Elimination updates the excess and the off-diagonal magnitudes using sums of
// nonnegative terms only and rebuilds each pivot as s_p + Σ_j W_pj, so no
// subtractive cancellation occurs (the GTH variant of Gaussian elimination).
// For nonnegative right-hand sides the triangular solves are again sums of
// nonnegative terms, so K⁻¹r is obtained with small relative error in every
// entry even when the weights span hundreds of orders of magnitude.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <string>

#include "errors.hpp"

namespace nlab {

class DiagonallyDominantFactorization {
 public:
  DiagonallyDominantFactorization(Eigen::MatrixXd offdiag, Eigen::VectorXd excess)
      : lower_(std::move(offdiag)), pivots_(excess.size()) {
    const Eigen::Index n = excess.size();
    if (lower_.rows() != n || lower_.cols() != n)
      throw ParameterError("factorisation: dimension mismatch");
    if ((lower_.array() < 0.0).any() || (excess.array() < 0.0).any())
      throw ParameterError("factorisation: weights and excess must be nonnegative");
    lower_.diagonal().setZero();

    Eigen::VectorXd s = std::move(excess);
    for (Eigen::Index p = 0; p < n; ++p) {
      const Eigen::Index rest = n - p - 1;
      auto column = lower_.col(p).tail(rest);
      const double pivot = s[p] + column.sum();
      if (!(pivot > 0.0))
        throw ParameterError("factorisation: singular M-matrix (zero pivot at " +
                             std::to_string(p) + ")");
      pivots_[p] = pivot;
      if (rest == 0) break;
      // Schur complement: W_ij += W_ip W_pj / pivot, s_i += W_ip s_p / pivot.
      s.tail(rest) += column * (s[p] / pivot);
      auto block = lower_.bottomRightCorner(rest, rest);
      block.noalias() += column * (column.transpose() / pivot);
      block.diagonal().setZero();
      column /= pivot;
    }
    // Only the strictly lower triangle carries the factor L = I - lower_.
    lower_.triangularView<Eigen::Upper>().setZero();
  }

  // Convenience: K = L_sym + shift·diag(scale), where L_sym has off-diagonals
  // -W and row excess `excess`.
  static DiagonallyDominantFactorization shifted(const Eigen::SparseMatrix<double>& weights,
                                                 const Eigen::VectorXd& excess,
                                                 const Eigen::VectorXd& scale, double shift) {
    return DiagonallyDominantFactorization(Eigen::MatrixXd(weights), excess + shift * scale);
  }

  Eigen::Index size() const { return pivots_.size(); }
  const Eigen::VectorXd& pivots() const { return pivots_; }

  // K x = r for r ≥ 0 entrywise; the result is ≥ 0.
  Eigen::VectorXd solve_nonnegative(const Eigen::VectorXd& r) const {
    const Eigen::Index n = size();
    Eigen::VectorXd y = r;
    for (Eigen::Index p = 0; p < n; ++p)
      if (y[p] != 0.0) y.tail(n - p - 1) += lower_.col(p).tail(n - p - 1) * y[p];
    y.array() /= pivots_.array();
    for (Eigen::Index p = n - 1; p >= 0; --p)
      y[p] += lower_.col(p).tail(n - p - 1).dot(y.tail(n - p - 1));
    return y;
  }

  // General right-hand side, split into positive and negative parts.
  Eigen::VectorXd solve(const Eigen::VectorXd& r) const {
    const Eigen::VectorXd pos = r.cwiseMax(0.0);
    const Eigen::VectorXd neg = (-r).cwiseMax(0.0);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(size());
    if (pos.any()) x += solve_nonnegative(pos);
    if (neg.any()) x -= solve_nonnegative(neg);
    return x;
  }

  // K⁻¹ (entrywise nonnegative).
  Eigen::MatrixXd inverse() const {
    const Eigen::Index n = size();
    Eigen::MatrixXd inv(n, n);
    for (Eigen::Index j = 0; j < n; ++j) inv.col(j) = solve_nonnegative(Eigen::VectorXd::Unit(n, j));
    return inv;
  }

 private:
  Eigen::MatrixXd lower_;  // magnitudes of the strictly lower factor entries
  Eigen::VectorXd pivots_;
};

}  // namespace nlab
