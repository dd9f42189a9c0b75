#pragma once

// Weighted graphs (b, c) over (X, m), vertex functions, exhaustions and the
// formal Laplacian.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace nlab {

using VertexId = std::int64_t;
using VertexSet = std::vector<VertexId>;

struct Neighbor {
  VertexId id;
  double weight;
};

// Read-only view of a (possibly infinite) weighted graph. Implementations
// must return each positive-weight neighbour exactly once and satisfy
// b(x, y) = b(y, x).
class GraphSource {
 public:
  virtual ~GraphSource() = default;

  virtual bool contains(VertexId x) const = 0;
  virtual double measure(VertexId x) const = 0;
  virtual double killing(VertexId x) const = 0;
  virtual std::vector<Neighbor> neighbors(VertexId x) const = 0;

  // Number of vertices, or nullopt for an infinite vertex set.
  virtual std::optional<std::size_t> size() const = 0;

  // Full vertex list; only meaningful for finite graphs.
  virtual VertexSet vertices() const {
    throw DomainError("vertex enumeration requested on an infinite graph");
  }

  virtual bool locally_finite() const { return true; }

  // Sum over all y of b(x, y).
  virtual double total_degree(VertexId x) const {
    double sum = 0.0;
    for (const auto& nb : neighbors(x)) sum += nb.weight;
    return sum;
  }

  virtual double edge_weight(VertexId x, VertexId y) const {
    for (const auto& nb : neighbors(x))
      if (nb.id == y) return nb.weight;
    return 0.0;
  }

  virtual std::string label(VertexId x) const { return std::to_string(x); }
  virtual std::string name() const { return "graph"; }
};

// Shared, immutable handle to a graph source.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::shared_ptr<const GraphSource> source)
      : source_(std::move(source)) {}

  bool valid() const { return static_cast<bool>(source_); }
  bool contains(VertexId x) const { return source_->contains(x); }
  double measure(VertexId x) const { return source_->measure(x); }
  double killing(VertexId x) const { return source_->killing(x); }
  std::vector<Neighbor> neighbors(VertexId x) const { return source_->neighbors(x); }
  std::optional<std::size_t> size() const { return source_->size(); }
  bool finite() const { return source_->size().has_value(); }
  VertexSet vertices() const { return source_->vertices(); }
  bool locally_finite() const { return source_->locally_finite(); }
  double total_degree(VertexId x) const { return source_->total_degree(x); }
  double edge_weight(VertexId x, VertexId y) const { return source_->edge_weight(x, y); }
  std::string label(VertexId x) const { return source_->label(x); }
  std::string name() const { return source_->name(); }

  const GraphSource& source() const { return *source_; }

 private:
  std::shared_ptr<const GraphSource> source_;
};

// Finite graph with each undirected edge stored once and mirrored on read.
class FiniteGraph final : public GraphSource {
 public:
  struct Edge {
    VertexId a;
    VertexId b;
    double weight;
  };

  class Builder {
   public:
    explicit Builder(std::string name = "finite") : name_(std::move(name)) {}

    Builder& add_vertex(VertexId id, double measure, double killing = 0.0) {
      if (!(measure > 0.0) || !std::isfinite(measure))
        throw ConstructionError("vertex " + std::to_string(id) + ": measure must be positive");
      if (!(killing >= 0.0) || !std::isfinite(killing))
        throw ConstructionError("vertex " + std::to_string(id) + ": killing must be nonnegative");
      if (index_.count(id))
        throw ConstructionError("duplicate vertex " + std::to_string(id));
      index_.emplace(id, ids_.size());
      ids_.push_back(id);
      measure_.push_back(measure);
      killing_.push_back(killing);
      return *this;
    }

    Builder& add_edge(VertexId a, VertexId b, double weight) {
      if (!(weight >= 0.0) || !std::isfinite(weight))
        throw ConstructionError("edge weight must be nonnegative and finite");
      if (a == b) throw ConstructionError("self-loop at vertex " + std::to_string(a));
      if (!index_.count(a) || !index_.count(b))
        throw ConstructionError("edge references unknown vertex");
      auto key = std::minmax(a, b);
      if (!edge_keys_.insert({key.first, key.second}).second)
        throw ConstructionError("duplicate edge " + std::to_string(a) + " " + std::to_string(b));
      edges_.push_back({a, b, weight});
      return *this;
    }

    WeightedGraph build() const {
      return WeightedGraph(std::shared_ptr<const GraphSource>(new FiniteGraph(*this)));
    }

   private:
    friend class FiniteGraph;
    struct PairHash {
      std::size_t operator()(const std::pair<VertexId, VertexId>& p) const noexcept {
        return std::hash<VertexId>{}(p.first) * 1000003u ^ std::hash<VertexId>{}(p.second);
      }
    };

    std::string name_;
    std::vector<VertexId> ids_;
    std::vector<double> measure_;
    std::vector<double> killing_;
    std::unordered_map<VertexId, std::size_t> index_;
    std::vector<Edge> edges_;
    std::unordered_set<std::pair<VertexId, VertexId>, PairHash> edge_keys_;
  };

  bool contains(VertexId x) const override { return index_.count(x) != 0; }
  double measure(VertexId x) const override { return measure_[at(x)]; }
  double killing(VertexId x) const override { return killing_[at(x)]; }

  std::vector<Neighbor> neighbors(VertexId x) const override {
    std::vector<Neighbor> out;
    for (std::size_t e : incident_[at(x)]) {
      const Edge& edge = edges_[e];
      if (edge.weight <= 0.0) continue;
      out.push_back({edge.a == x ? edge.b : edge.a, edge.weight});
    }
    return out;
  }

  std::optional<std::size_t> size() const override { return ids_.size(); }
  VertexSet vertices() const override { return ids_; }
  std::string name() const override { return name_; }

  const std::vector<Edge>& edges() const { return edges_; }

 private:
  explicit FiniteGraph(const Builder& b)
      : name_(b.name_), ids_(b.ids_), measure_(b.measure_), killing_(b.killing_),
        index_(b.index_), edges_(b.edges_), incident_(b.ids_.size()) {
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      incident_[index_.at(edges_[e].a)].push_back(e);
      incident_[index_.at(edges_[e].b)].push_back(e);
    }
  }

  std::size_t at(VertexId x) const {
    auto it = index_.find(x);
    if (it == index_.end()) throw DomainError("unknown vertex " + std::to_string(x));
    return it->second;
  }

  std::string name_;
  std::vector<VertexId> ids_;
  std::vector<double> measure_;
  std::vector<double> killing_;
  std::unordered_map<VertexId, std::size_t> index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incident_;
};

// Lazily generated graph defined by callbacks. Used for the infinite model
// families; only ever materialised through an Exhaustion.
struct GraphCallbacks {
  std::string name = "lazy";
  std::function<bool(VertexId)> contains;
  std::function<double(VertexId)> measure;
  std::function<double(VertexId)> killing;  // may be empty: c = 0
  std::function<std::vector<Neighbor>(VertexId)> neighbors;
  std::function<std::string(VertexId)> label;  // optional
  std::function<VertexId(std::size_t)> enumerate;  // optional vertex enumeration
};

class CallbackGraph final : public GraphSource {
 public:
  explicit CallbackGraph(GraphCallbacks cb) : cb_(std::move(cb)) {
    if (!cb_.contains || !cb_.measure || !cb_.neighbors)
      throw ConstructionError("callback graph requires contains, measure and neighbors");
  }

  bool contains(VertexId x) const override { return cb_.contains(x); }
  double measure(VertexId x) const override { return cb_.measure(x); }
  double killing(VertexId x) const override { return cb_.killing ? cb_.killing(x) : 0.0; }
  std::vector<Neighbor> neighbors(VertexId x) const override { return cb_.neighbors(x); }
  std::optional<std::size_t> size() const override { return std::nullopt; }
  std::string label(VertexId x) const override {
    return cb_.label ? cb_.label(x) : std::to_string(x);
  }
  std::string name() const override { return cb_.name; }

  // i-th vertex in the generator's canonical enumeration.
  VertexId vertex_at(std::size_t i) const {
    if (!cb_.enumerate) throw DomainError("graph has no vertex enumeration");
    return cb_.enumerate(i);
  }

 private:
  GraphCallbacks cb_;
};

inline WeightedGraph make_callback_graph(GraphCallbacks cb) {
  return WeightedGraph(std::make_shared<const CallbackGraph>(std::move(cb)));
}

// Real function on the vertices: finitely many stored values plus a constant
// background value elsewhere. Finitely supported iff the background is 0.
class VertexFunction {
 public:
  VertexFunction() = default;

  static VertexFunction indicator(VertexId x, double value = 1.0) {
    VertexFunction f;
    f.set(x, value);
    return f;
  }
  static VertexFunction constant(double value) {
    VertexFunction f;
    f.background_ = value;
    return f;
  }

  double operator()(VertexId x) const {
    auto it = values_.find(x);
    return it == values_.end() ? background_ : it->second;
  }
  void set(VertexId x, double value) { values_[x] = value; }

  bool finitely_supported() const { return background_ == 0.0; }
  double background() const { return background_; }
  const std::map<VertexId, double>& entries() const { return values_; }

  // Vertices with a stored nonzero value.
  VertexSet support() const {
    VertexSet out;
    for (const auto& [x, v] : values_)
      if (v != 0.0) out.push_back(x);
    return out;
  }

  bool nonnegative() const {
    if (background_ < 0.0) return false;
    return std::all_of(values_.begin(), values_.end(),
                       [](const auto& kv) { return kv.second >= 0.0; });
  }

  friend VertexFunction operator-(const VertexFunction& a, const VertexFunction& b) {
    return combine(a, b, [](double x, double y) { return x - y; });
  }
  friend VertexFunction operator+(const VertexFunction& a, const VertexFunction& b) {
    return combine(a, b, [](double x, double y) { return x + y; });
  }
  friend VertexFunction operator*(double s, const VertexFunction& a) {
    VertexFunction out = a;
    for (auto& kv : out.values_) kv.second *= s;
    out.background_ *= s;
    return out;
  }

 private:
  template <class Op>
  static VertexFunction combine(const VertexFunction& a, const VertexFunction& b, Op op) {
    VertexFunction out;
    out.background_ = op(a.background_, b.background_);
    for (const auto& [x, v] : a.values_) out.values_[x] = op(v, b(x));
    for (const auto& [x, v] : b.values_)
      if (!a.values_.count(x)) out.values_[x] = op(a(x), v);
    return out;
  }

  std::map<VertexId, double> values_;
  double background_ = 0.0;
};

namespace detail {

inline VertexSet evaluation_domain(const WeightedGraph& g, const VertexFunction& f) {
  if (f.finitely_supported()) {
    VertexSet out;
    for (const auto& [x, v] : f.entries()) out.push_back(x);
    return out;
  }
  if (!g.finite()) throw DomainError("norm of a function without finite support on an infinite graph");
  return g.vertices();
}

}  // namespace detail

// ||f||_p^p = sum |f(x)|^p m(x).
inline double lp_norm(const WeightedGraph& g, const VertexFunction& f, double p) {
  if (!(p >= 1.0)) throw ParameterError("lp_norm requires p >= 1");
  double sum = 0.0;
  for (VertexId x : detail::evaluation_domain(g, f)) {
    const double v = std::abs(f(x));
    if (v != 0.0) sum += std::pow(v, p) * g.measure(x);
  }
  return p == 1.0 ? sum : std::pow(sum, 1.0 / p);
}

inline double sup_norm(const VertexFunction& f) {
  double s = std::abs(f.background());
  for (const auto& [x, v] : f.entries()) s = std::max(s, std::abs(v));
  return s;
}

inline double weighted_degree(const WeightedGraph& g, VertexId x) {
  return (g.total_degree(x) + g.killing(x)) / g.measure(x);
}

// Δf(x) = (1/m(x)) Σ_y b(x,y)(f(x) - f(y)) + (c(x)/m(x)) f(x).
inline double formal_laplacian(const WeightedGraph& g, const VertexFunction& f, VertexId x) {
  const double fx = f(x);
  double sum = 0.0;
  if (g.locally_finite()) {
    for (const auto& nb : g.neighbors(x)) sum += nb.weight * (fx - f(nb.id));
  } else {
    if (!f.finitely_supported())
      throw DomainError("formal Laplacian: neighbour sum may diverge (non-locally-finite graph, "
                        "function without finite support)");
    sum = fx * g.total_degree(x);
    for (const auto& [y, v] : f.entries())
      if (y != x && v != 0.0) sum -= g.edge_weight(x, y) * v;
  }
  if (!std::isfinite(sum)) throw DomainError("formal Laplacian: divergent neighbour sum");
  return (sum + g.killing(x) * fx) / g.measure(x);
}

// Δf as a finitely supported function (f finitely supported, g locally finite).
inline VertexFunction formal_laplacian(const WeightedGraph& g, const VertexFunction& f) {
  if (!f.finitely_supported())
    throw DomainError("formal Laplacian of a function without finite support");
  std::map<VertexId, bool> domain;
  for (VertexId x : f.support()) {
    domain[x] = true;
    for (const auto& nb : g.neighbors(x)) domain[nb.id] = true;
  }
  VertexFunction out;
  for (const auto& [x, _] : domain) out.set(x, formal_laplacian(g, f, x));
  return out;
}

// {y ∈ K | b(y, z) > 0 for some z ∉ K}, in the order of K.
inline VertexSet vertex_boundary(const WeightedGraph& g, std::span<const VertexId> set) {
  std::unordered_set<VertexId> inside(set.begin(), set.end());
  VertexSet out;
  for (VertexId y : set) {
    if (g.locally_finite()) {
      for (const auto& nb : g.neighbors(y)) {
        if (!inside.count(nb.id)) {
          out.push_back(y);
          break;
        }
      }
    } else {
      double within = 0.0;
      for (VertexId z : set) within += g.edge_weight(y, z);
      if (g.total_degree(y) > within) out.push_back(y);
    }
  }
  return out;
}

// Connectivity of the subgraph induced on S through positive weights.
inline bool is_connected(const WeightedGraph& g, std::span<const VertexId> set) {
  if (set.empty()) return true;
  std::unordered_set<VertexId> inside(set.begin(), set.end());
  std::unordered_set<VertexId> seen{set.front()};
  std::queue<VertexId> queue;
  queue.push(set.front());
  while (!queue.empty()) {
    VertexId x = queue.front();
    queue.pop();
    for (const auto& nb : g.neighbors(x)) {
      if (nb.weight > 0.0 && inside.count(nb.id) && seen.insert(nb.id).second) queue.push(nb.id);
    }
  }
  return seen.size() == inside.size();
}

// Hop distances from `root` within the subgraph induced on `set`.
inline std::unordered_map<VertexId, int> hop_distances(const WeightedGraph& g,
                                                       std::span<const VertexId> set,
                                                       VertexId root) {
  std::unordered_set<VertexId> inside(set.begin(), set.end());
  std::unordered_map<VertexId, int> dist{{root, 0}};
  std::queue<VertexId> queue;
  queue.push(root);
  while (!queue.empty()) {
    VertexId x = queue.front();
    queue.pop();
    for (const auto& nb : g.neighbors(x)) {
      if (inside.count(nb.id) && !dist.count(nb.id)) {
        dist[nb.id] = dist[x] + 1;
        queue.push(nb.id);
      }
    }
  }
  return dist;
}

// Nested finite connected sets X_0 ⊆ X_1 ⊆ ... stored as one insertion-ordered
// vertex list with prefix sizes; level k is the first sizes[k] entries.
class Exhaustion {
 public:
  Exhaustion(WeightedGraph graph, const std::vector<VertexSet>& sets,
             std::vector<std::int64_t> tags = {})
      : graph_(std::move(graph)), tags_(std::move(tags)) {
    if (sets.empty()) throw ConstructionError("exhaustion needs at least one set");
    if (!tags_.empty() && tags_.size() != sets.size())
      throw ConstructionError("exhaustion tags must match the number of sets");
    if (tags_.empty())
      for (std::size_t k = 0; k < sets.size(); ++k) tags_.push_back(static_cast<std::int64_t>(k));

    std::unordered_set<VertexId> current;
    for (std::size_t k = 0; k < sets.size(); ++k) {
      const VertexSet& s = sets[k];
      if (s.empty()) throw ConstructionError("exhaustion set " + std::to_string(k) + " is empty");
      std::unordered_set<VertexId> next(s.begin(), s.end());
      if (next.size() != s.size())
        throw ConstructionError("exhaustion set " + std::to_string(k) + " has duplicates");
      for (VertexId x : current)
        if (!next.count(x))
          throw ConstructionError("exhaustion sets are not nested at level " + std::to_string(k));
      for (VertexId x : s) {
        if (current.count(x)) continue;
        if (!graph_.contains(x))
          throw ConstructionError("vertex " + std::to_string(x) + " is not in the graph");
        order_.push_back(x);
        current.insert(x);
      }
      sizes_.push_back(order_.size());
      if (!is_connected(graph_, level(k)))
        throw ConstructionError("exhaustion set " + std::to_string(k) +
                                " induces a disconnected subgraph");
    }
  }

  const WeightedGraph& graph() const { return graph_; }
  std::size_t levels() const { return sizes_.size(); }
  std::span<const VertexId> level(std::size_t k) const {
    return std::span<const VertexId>(order_.data(), sizes_.at(k));
  }
  std::size_t level_size(std::size_t k) const { return sizes_.at(k); }
  std::int64_t tag(std::size_t k) const { return tags_.at(k); }
  const std::vector<std::int64_t>& tags() const { return tags_; }

  // First level containing every vertex of `vs`, or nullopt.
  std::optional<std::size_t> first_level_containing(std::span<const VertexId> vs) const {
    std::unordered_map<VertexId, std::size_t> pos;
    for (std::size_t i = 0; i < order_.size(); ++i) pos.emplace(order_[i], i);
    std::size_t need = 0;
    for (VertexId x : vs) {
      auto it = pos.find(x);
      if (it == pos.end()) return std::nullopt;
      need = std::max(need, it->second + 1);
    }
    for (std::size_t k = 0; k < sizes_.size(); ++k)
      if (sizes_[k] >= need) return k;
    return std::nullopt;
  }

  // Sub-exhaustion made of the given level indices (ascending).
  Exhaustion select(const std::vector<std::size_t>& indices) const {
    std::vector<VertexSet> sets;
    std::vector<std::int64_t> tags;
    for (std::size_t k : indices) {
      auto l = level(k);
      sets.emplace_back(l.begin(), l.end());
      tags.push_back(tag(k));
    }
    return Exhaustion(graph_, sets, tags);
  }

 private:
  WeightedGraph graph_;
  VertexSet order_;
  std::vector<std::size_t> sizes_;
  std::vector<std::int64_t> tags_;
};

}  // namespace nlab
