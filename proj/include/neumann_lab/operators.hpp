#pragma once

// Finite-matrix realisations of the Dirichlet and Neumann restrictions of the
// Laplacian to a finite vertex set X_k, and their quadratic forms.
//
// Both restrictions share the in-set weights b on X_k x X_k. They differ only
// in the diagonal "excess": the Neumann restriction keeps the killing term c,
// the Dirichlet restriction adds the weight of every edge leaving X_k.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "graph.hpp"

namespace nlab {

enum class Restriction { Dirichlet, Neumann };

inline const char* to_string(Restriction r) {
  return r == Restriction::Dirichlet ? "dirichlet" : "neumann";
}

struct AssemblyOptions {
  // Largest vertex count for which a dense matrix may be materialised.
  std::size_t dense_cap = 4096;
  // Weights and measures must lie inside [1/max_magnitude, max_magnitude].
  double max_magnitude = 1e300;
};

class RestrictedOperator {
 public:
  Restriction kind() const { return kind_; }
  std::size_t size() const { return vertices_.size(); }
  std::span<const VertexId> vertices() const { return vertices_; }
  const std::string& graph_name() const { return graph_name_; }

  std::optional<std::size_t> index_of(VertexId x) const {
    auto it = index_.find(x);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Eigen::VectorXd& measure() const { return measure_; }
  const Eigen::VectorXd& killing() const { return killing_; }
  // Σ_{y ∉ X_k} b(x, y).
  const Eigen::VectorXd& boundary_weight() const { return boundary_; }
  // Σ_{y ∈ X_k} b(x, y).
  const Eigen::VectorXd& inner_degree() const { return inner_; }
  // Symmetric in-set weights b(x, y), zero diagonal.
  const Eigen::SparseMatrix<double>& weights() const { return weights_; }

  // Row excess of the symmetric form M·A: c, plus the boundary weight for
  // the Dirichlet kind.
  Eigen::VectorXd excess() const {
    return kind_ == Restriction::Dirichlet ? Eigen::VectorXd(killing_ + boundary_) : killing_;
  }

  // Diagonal of A.
  Eigen::VectorXd diagonal() const {
    return ((inner_ + excess()).array() / measure_.array()).matrix();
  }

  bool dense_available() const { return size() <= dense_cap_; }

  // Dense A with A[x][y] = -b(x,y)/m(x) off the diagonal.
  Eigen::MatrixXd matrix() const {
    if (!dense_available())
      throw ParameterError("dense matrix requested above the size cap (" +
                           std::to_string(dense_cap_) + ")");
    Eigen::MatrixXd a = -Eigen::MatrixXd(weights_);
    a.diagonal() = inner_ + excess();
    return measure_.cwiseInverse().asDiagonal() * a;
  }

  // Dense symmetric M·A (the graph Laplacian matrix of the restriction).
  Eigen::MatrixXd symmetric_matrix() const {
    if (!dense_available())
      throw ParameterError("dense matrix requested above the size cap");
    Eigen::MatrixXd a = -Eigen::MatrixXd(weights_);
    a.diagonal() = inner_ + excess();
    return a;
  }

  Eigen::VectorXd apply(const Eigen::VectorXd& f) const {
    Eigen::VectorXd out = (inner_ + excess()).cwiseProduct(f) - weights_ * f;
    return out.cwiseQuotient(measure_);
  }

  // ‖A‖_∞: maximal absolute row sum.
  double row_norm() const {
    return (2.0 * inner_ + excess()).cwiseQuotient(measure_).maxCoeff();
  }

  // Q(f) = ½ Σ_{x,y ∈ X_k} b(x,y)(f(x) - f(y))² + Σ_x excess(x) f(x)².
  double form(const Eigen::VectorXd& f) const {
    double energy = 0.0;
    for (int col = 0; col < weights_.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(weights_, col); it; ++it)
        if (it.row() < col) {
          const double d = f[it.row()] - f[col];
          energy += it.value() * d * d;
        }
    return energy + excess().dot(f.cwiseAbs2());
  }

  double inner_product(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return (u.cwiseProduct(v)).dot(measure_);
  }
  double norm2(const Eigen::VectorXd& u) const { return std::sqrt(inner_product(u, u)); }
  double norm1(const Eigen::VectorXd& u) const { return u.cwiseAbs().dot(measure_); }

  // Local coordinates of f; f must vanish outside X_k.
  Eigen::VectorXd restrict(const VertexFunction& f) const {
    if (!f.finitely_supported())
      throw DomainError("function is not finitely supported");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
    for (const auto& [x, v] : f.entries()) {
      if (v == 0.0) continue;
      auto i = index_of(x);
      if (!i) throw DomainError("function support leaves the operator's vertex set (vertex " +
                                std::to_string(x) + ")");
      out[static_cast<Eigen::Index>(*i)] = v;
    }
    return out;
  }

  // Extension by zero.
  VertexFunction extend(const Eigen::VectorXd& local) const {
    VertexFunction out;
    for (std::size_t i = 0; i < size(); ++i) out.set(vertices_[i], local[static_cast<Eigen::Index>(i)]);
    return out;
  }

 private:
  friend RestrictedOperator assemble(const WeightedGraph&, std::span<const VertexId>, Restriction,
                                     const AssemblyOptions&);

  Restriction kind_ = Restriction::Neumann;
  std::string graph_name_;
  VertexSet vertices_;
  std::unordered_map<VertexId, std::size_t> index_;
  Eigen::VectorXd measure_, killing_, boundary_, inner_;
  Eigen::SparseMatrix<double> weights_;
  std::size_t dense_cap_ = 4096;
};

inline RestrictedOperator assemble(const WeightedGraph& g, std::span<const VertexId> set,
                                   Restriction kind, const AssemblyOptions& opts = {}) {
  if (set.empty()) throw ConstructionError("cannot assemble an operator on an empty set");
  if (!is_connected(g, set)) throw ConstructionError("induced subgraph is disconnected");

  RestrictedOperator op;
  op.kind_ = kind;
  op.graph_name_ = g.name();
  op.dense_cap_ = opts.dense_cap;
  op.vertices_.assign(set.begin(), set.end());
  const auto n = static_cast<Eigen::Index>(set.size());
  for (std::size_t i = 0; i < set.size(); ++i)
    if (!op.index_.emplace(set[i], i).second) throw ConstructionError("duplicate vertex in set");

  auto check = [&](double v, const char* what, VertexId x) {
    if (!std::isfinite(v) || std::abs(v) > opts.max_magnitude ||
        (v != 0.0 && std::abs(v) < 1.0 / opts.max_magnitude))
      throw OverflowError(std::string(what) + " at vertex " + g.label(x) +
                          " leaves the representable range; reduce the truncation");
  };

  op.measure_.resize(n);
  op.killing_.resize(n);
  op.boundary_.resize(n);
  op.inner_.resize(n);
  std::vector<Eigen::Triplet<double>> triplets;
  for (Eigen::Index i = 0; i < n; ++i) {
    const VertexId x = set[static_cast<std::size_t>(i)];
    op.measure_[i] = g.measure(x);
    op.killing_[i] = g.killing(x);
    check(op.measure_[i], "measure", x);
    check(op.killing_[i], "killing term", x);
    double inner = 0.0, outer = 0.0;
    if (g.locally_finite()) {
      for (const auto& nb : g.neighbors(x)) {
        check(nb.weight, "edge weight", x);
        auto j = op.index_.find(nb.id);
        if (j == op.index_.end()) {
          outer += nb.weight;
        } else {
          inner += nb.weight;
          triplets.emplace_back(i, static_cast<Eigen::Index>(j->second), nb.weight);
        }
      }
    } else {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double b = g.edge_weight(x, set[static_cast<std::size_t>(j)]);
        if (b > 0.0) {
          inner += b;
          triplets.emplace_back(i, j, b);
        }
      }
      outer = std::max(0.0, g.total_degree(x) - inner);
    }
    op.inner_[i] = inner;
    op.boundary_[i] = outer;
  }
  op.weights_.resize(n, n);
  op.weights_.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

inline RestrictedOperator assemble_dirichlet(const WeightedGraph& g, std::span<const VertexId> set,
                                             const AssemblyOptions& opts = {}) {
  return assemble(g, set, Restriction::Dirichlet, opts);
}

inline RestrictedOperator assemble_neumann(const WeightedGraph& g, std::span<const VertexId> set,
                                           const AssemblyOptions& opts = {}) {
  return assemble(g, set, Restriction::Neumann, opts);
}

inline double evaluate_form(const RestrictedOperator& op, const VertexFunction& f) {
  return op.form(op.restrict(f));
}

// max_x |L^(N)_k f(x) - (Δ(i_k f)(x) - f(x) Δ1_{X_k}(x) + c(x) f(x) / m(x))| over X_k.
// The killing correction vanishes for c = 0.
inline double laplacian_identity_check(const WeightedGraph& g, std::span<const VertexId> set,
                                       const VertexFunction& f) {
  const RestrictedOperator op = assemble_neumann(g, set);
  const Eigen::VectorXd local = op.restrict(f);
  const Eigen::VectorXd neumann = op.apply(local);
  VertexFunction extended = op.extend(local);
  VertexFunction indicator;
  for (VertexId x : set) indicator.set(x, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const VertexId x = set[i];
    const double rhs = formal_laplacian(g, extended, x) -
                       local[static_cast<Eigen::Index>(i)] * formal_laplacian(g, indicator, x) +
                       g.killing(x) * local[static_cast<Eigen::Index>(i)] / g.measure(x);
    worst = std::max(worst, std::abs(neumann[static_cast<Eigen::Index>(i)] - rhs));
  }
  return worst;
}

// Writes A as "row col value" triples (local indices, nonzeros only),
// preceded by a comment header naming the vertex order.
inline void dump_matrix(std::ostream& out, const RestrictedOperator& op) {
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "# " << to_string(op.kind()) << " restriction on " << op.size() << " vertices\n";
  out << "# order:";
  for (VertexId x : op.vertices()) out << ' ' << x;
  out << '\n';
  const Eigen::VectorXd diag = op.diagonal();
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(op.size()); ++i) {
    std::vector<std::pair<Eigen::Index, double>> row{{i, diag[i]}};
    // weights are symmetric, so column i lists row i
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.weights(), i); it; ++it)
      row.emplace_back(it.row(), -it.value() / op.measure()[i]);
    std::sort(row.begin(), row.end());
    for (const auto& [j, v] : row)
      if (v != 0.0) out << i << ' ' << j << ' ' << v << '\n';
  }
}

}  // namespace nlab
