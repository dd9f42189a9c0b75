#pragma once

// Graph families and their canonical exhaustions: the comb, birth-death chains
// (presets and expressions), finite paths, random finite graphs and graph files.

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "birth_death.hpp"
#include "graph.hpp"
#include "graph_io.hpp"

namespace nlab {

// ---------------------------------------------------------------- comb

// Cantor pairing of (k, n).
inline VertexId comb_id(std::int64_t k, std::int64_t n) {
  return (k + n) * (k + n + 1) / 2 + n;
}

inline std::pair<std::int64_t, std::int64_t> comb_coords(VertexId id) {
  auto w = static_cast<std::int64_t>((std::sqrt(8.0 * static_cast<double>(id) + 1.0) - 1.0) / 2.0);
  while (w * (w + 1) / 2 > id) --w;
  while ((w + 1) * (w + 2) / 2 <= id) ++w;
  const std::int64_t n = id - w * (w + 1) / 2;
  return {w - n, n};
}

// b((k,n),(k+1,n)) = 2^{nk}.
inline BigInt comb_tooth_weight(std::int64_t k, std::int64_t n) { return BigInt(1) << (n * k); }
// b((0,n),(0,n+1)) = 4^{n+2}.
inline BigInt comb_base_weight(std::int64_t n) { return BigInt(1) << (2 * (n + 2)); }
// m(0,n) = 2^{-n}, m(k,n) = 1 for k > 0.
inline Rational comb_measure(std::int64_t k, std::int64_t n) {
  return k == 0 ? Rational(BigInt(1), BigInt(1) << n) : Rational(1);
}

namespace detail {

inline double big_to_double(const BigInt& v) {
  const double d = v.convert_to<double>();
  return d;  // +inf past the double range; assembly reports the overflow
}

}  // namespace detail

inline WeightedGraph make_comb() {
  GraphCallbacks cb;
  cb.name = "comb";
  cb.contains = [](VertexId x) { return x >= 0; };
  cb.measure = [](VertexId x) {
    auto [k, n] = comb_coords(x);
    return comb_measure(k, n).convert_to<double>();
  };
  cb.neighbors = [](VertexId x) {
    auto [k, n] = comb_coords(x);
    std::vector<Neighbor> out;
    out.push_back({comb_id(k + 1, n), detail::big_to_double(comb_tooth_weight(k, n))});
    if (k > 0) out.push_back({comb_id(k - 1, n), detail::big_to_double(comb_tooth_weight(k - 1, n))});
    if (k == 0) {
      out.push_back({comb_id(0, n + 1), detail::big_to_double(comb_base_weight(n))});
      if (n > 0) out.push_back({comb_id(0, n - 1), detail::big_to_double(comb_base_weight(n - 1))});
    }
    return out;
  };
  cb.label = [](VertexId x) {
    auto [k, n] = comb_coords(x);
    return "(" + std::to_string(k) + "," + std::to_string(n) + ")";
  };
  cb.enumerate = [](std::size_t i) { return static_cast<VertexId>(i); };
  return make_callback_graph(std::move(cb));
}

// K_j = {(k, n) : k ≤ 2j, n ≤ j}, ordered by (n, k).
inline VertexSet comb_rectangle(std::int64_t j) {
  VertexSet out;
  for (std::int64_t n = 0; n <= j; ++n)
    for (std::int64_t k = 0; k <= 2 * j; ++k) out.push_back(comb_id(k, n));
  return out;
}

// Largest j for which every weight touching K_j stays below 1e300.
inline std::int64_t comb_truncation_cap(double max_magnitude = 1e300) {
  const double limit = std::log2(max_magnitude);
  std::int64_t j = 0;
  while (static_cast<double>(2 * (j + 1) * (j + 1)) <= limit &&
         static_cast<double>(2 * (j + 3)) <= limit && static_cast<double>(j + 1) <= limit)
    ++j;
  return j;
}

// ---------------------------------------------------------------- chains

inline WeightedGraph chain_graph(const BdChain& chain) {
  GraphCallbacks cb;
  cb.name = chain.name;
  cb.contains = [](VertexId x) { return x >= 0; };
  cb.measure = [m = chain.measure](VertexId x) { return m(x); };
  cb.neighbors = [b = chain.rate](VertexId x) {
    std::vector<Neighbor> out{{x + 1, b(x)}};
    if (x > 0) out.push_back({x - 1, b(x - 1)});
    return out;
  };
  cb.enumerate = [](std::size_t i) { return static_cast<VertexId>(i); };
  return make_callback_graph(std::move(cb));
}

namespace detail {

// Double evaluation that returns ±inf/0 instead of throwing, leaving the range
// check to operator assembly.
inline std::function<double(long long)> lenient(const Expression& e) {
  return [e](long long r) { return e.exact(r).convert_to<double>(); };
}

}  // namespace detail

inline BdChain chain_from_expressions(const std::string& rate_expr, const std::string& measure_expr,
                                      int validate_prefix = 200) {
  const Expression rate = Expression::parse(rate_expr);
  const Expression measure = Expression::parse(measure_expr);
  for (int r = 0; r <= validate_prefix; ++r) {
    if (rate.exact(r) <= 0)
      throw ParameterError("rate expression \"" + rate_expr + "\" is not positive at r = " +
                           std::to_string(r));
    if (measure.exact(r) <= 0)
      throw ParameterError("measure expression \"" + measure_expr + "\" is not positive at r = " +
                           std::to_string(r));
  }
  BdChain c;
  c.name = "bd:" + rate_expr + "|" + measure_expr;
  c.rate = detail::lenient(rate);
  c.measure = detail::lenient(measure);
  c.exact_rate = [rate](long long r) { return rate.exact(r); };
  c.exact_measure = [measure](long long r) { return measure.exact(r); };
  c.rate_class = rate.asymptotic_class();
  c.measure_class = measure.asymptotic_class();
  if ((c.rate_class && c.rate_class->C <= 0) || (c.measure_class && c.measure_class->C <= 0))
    throw ParameterError("expression becomes negative for large r");
  return c;
}

struct BdModel {
  WeightedGraph graph;
  BdChain chain;
};

inline BdModel make_bd_chain(const std::string& rate_expr, const std::string& measure_expr) {
  BdChain chain = chain_from_expressions(rate_expr, measure_expr);
  return {chain_graph(chain), chain};
}

inline BdChain bd_preset(const std::string& name) {
  if (name == "bd:unit") {
    BdChain c = chain_from_expressions("1", "1");
    c.name = name;
    return c;
  }
  if (name == "bd:geo") {
    BdChain c = chain_from_expressions("2^r", "2^(-r)");
    c.name = name;
    c.measure_total = 2.0;
    c.tail = [](long long r) { return std::ldexp(1.0, static_cast<int>(-r)); };
    return c;
  }
  if (name == "bd:explosive") {
    BdChain c = chain_from_expressions("4^r", "1");
    c.name = name;
    return c;
  }
  if (name == "bd:tail") {
    // m(r) = (r+1)^{-2} and b(r, r+1) = m({k > r}) = ψ₁(r + 2).
    BdChain c;
    c.name = name;
    c.measure = [](long long r) { return 1.0 / (static_cast<double>(r + 1) * static_cast<double>(r + 1)); };
    c.exact_measure = [](long long r) { return Rational(1, BigInt(r + 1) * (r + 1)); };
    c.rate = [](long long r) { return boost::math::trigamma(static_cast<double>(r) + 2.0); };
    c.tail = c.rate;
    c.measure_total = boost::math::constants::pi_sqr<double>() / 6.0;
    c.measure_class = AsymptoticClass{1, -2, 0, 1};
    c.rate_class = AsymptoticClass{1, -1, 0, 1};
    return c;
  }
  throw ParameterError("unknown chain preset \"" + name + "\"");
}

// ---------------------------------------------------------------- finite

inline WeightedGraph make_path(int n) {
  if (n < 1) throw ParameterError("path needs at least one vertex");
  FiniteGraph::Builder b("path:" + std::to_string(n));
  for (int i = 0; i < n; ++i) b.add_vertex(i, 1.0);
  for (int i = 0; i + 1 < n; ++i) b.add_edge(i, i + 1, 1.0);
  return b.build();
}

struct RandomGraphOptions {
  double extra_edge_probability = 0.1;
  double weight_min = 0.5, weight_max = 2.0;
  double measure_min = 0.5, measure_max = 2.0;
  double killing_probability = 0.0;
  double killing_max = 1.0;
};

// Portable uniform draw in [lo, hi) (std::uniform_real_distribution is not
// reproducible across standard libraries).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Connected random graph: random spanning tree plus independent extra edges.
inline WeightedGraph make_random_graph(int n, std::uint64_t seed, const RandomGraphOptions& opt = {}) {
  if (n < 1) throw ParameterError("random graph needs at least one vertex");
  std::mt19937_64 rng(seed);
  FiniteGraph::Builder b("random:" + std::to_string(n) + ":" + std::to_string(seed));
  for (int i = 0; i < n; ++i) {
    const double c = uniform(rng, 0.0, 1.0) < opt.killing_probability
                         ? uniform(rng, 0.0, opt.killing_max)
                         : 0.0;
    b.add_vertex(i, uniform(rng, opt.measure_min, opt.measure_max), c);
  }
  std::set<std::pair<int, int>> used;
  for (int i = 1; i < n; ++i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i));
    used.insert({j, i});
    b.add_edge(j, i, uniform(rng, opt.weight_min, opt.weight_max));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!used.count({i, j}) && uniform(rng, 0.0, 1.0) < opt.extra_edge_probability)
        b.add_edge(i, j, uniform(rng, opt.weight_min, opt.weight_max));
  return b.build();
}

// ---------------------------------------------------------------- models

enum class Family { Chain, Comb, Finite };

struct Model {
  std::string name;
  Family family = Family::Finite;
  WeightedGraph graph;
  std::optional<BdChain> chain;
  VertexId root = 0;
};

// Presets: comb, bd:unit, bd:geo, bd:explosive, bd:tail, bd:expr (with
// expressions), path:<n>, random:<n> (with seed), file:<path>.
inline Model make_model(const std::string& name, std::uint64_t seed = 1,
                        const std::string& rate_expr = "", const std::string& measure_expr = "") {
  Model m;
  m.name = name;
  if (name == "comb") {
    m.family = Family::Comb;
    m.graph = make_comb();
    m.root = comb_id(0, 0);
  } else if (name == "bd:expr" || (name.rfind("bd:", 0) == 0 && !rate_expr.empty())) {
    if (rate_expr.empty() || measure_expr.empty())
      throw ParameterError("bd:expr needs both a rate and a measure expression");
    m.family = Family::Chain;
    m.chain = chain_from_expressions(rate_expr, measure_expr);
    m.graph = chain_graph(*m.chain);
  } else if (name.rfind("bd:", 0) == 0) {
    m.family = Family::Chain;
    m.chain = bd_preset(name);
    m.graph = chain_graph(*m.chain);
  } else if (name.rfind("path:", 0) == 0) {
    m.graph = make_path(std::stoi(name.substr(5)));
  } else if (name.rfind("random:", 0) == 0) {
    m.graph = make_random_graph(std::stoi(name.substr(7)), seed);
  } else if (name.rfind("file:", 0) == 0) {
    m.graph = read_graph_file(name.substr(5));
    m.root = m.graph.vertices().front();
  } else {
    throw ParameterError("unknown model \"" + name + "\"");
  }
  return m;
}

inline std::vector<std::string> preset_names() {
  return {"comb", "bd:unit", "bd:geo", "bd:explosive", "bd:tail"};
}

// Hop ball of radius `radius` around `root`, in breadth-first order.
inline VertexSet hop_ball(const WeightedGraph& g, VertexId root, std::int64_t radius) {
  VertexSet out{root};
  std::unordered_map<VertexId, std::int64_t> dist{{root, 0}};
  for (std::size_t i = 0; i < out.size(); ++i) {
    const VertexId x = out[i];
    if (dist[x] == radius) continue;
    for (const auto& nb : g.neighbors(x))
      if (!dist.count(nb.id)) {
        dist[nb.id] = dist[x] + 1;
        out.push_back(nb.id);
      }
  }
  return out;
}

// Level set for truncation parameter `tag`: {0..tag} for chains, K_tag for the
// comb, the hop ball of radius tag around the root otherwise.
inline VertexSet truncation_set(const Model& m, std::int64_t tag) {
  if (tag < 0) throw ParameterError("truncation parameter must be nonnegative");
  switch (m.family) {
    case Family::Chain: {
      VertexSet out(static_cast<std::size_t>(tag) + 1);
      for (std::int64_t r = 0; r <= tag; ++r) out[static_cast<std::size_t>(r)] = r;
      return out;
    }
    case Family::Comb: return comb_rectangle(tag);
    case Family::Finite: return hop_ball(m.graph, m.root, tag);
  }
  return {};
}

inline Exhaustion make_exhaustion(const Model& m, const std::vector<std::int64_t>& tags) {
  if (tags.empty()) throw ParameterError("exhaustion needs at least one truncation");
  if (!std::is_sorted(tags.begin(), tags.end()))
    throw ParameterError("truncation parameters must be nondecreasing");
  std::vector<VertexSet> sets;
  for (auto t : tags) sets.push_back(truncation_set(m, t));
  return Exhaustion(m.graph, sets, tags);
}

// Levels with truncation parameters 0..count-1.
inline Exhaustion first_truncations(const Model& m, std::size_t count) {
  if (count < 1) throw ParameterError("count must be at least 1");
  std::vector<std::int64_t> tags(count);
  for (std::size_t i = 0; i < count; ++i) tags[i] = static_cast<std::int64_t>(i);
  return make_exhaustion(m, tags);
}

// Largest usable truncation parameter: the overflow cap for the comb and for
// chains (scanned up to `chain_limit`), the root eccentricity for finite graphs.
inline std::int64_t max_truncation(const Model& m, std::int64_t chain_limit = 2000,
                                   double max_magnitude = 1e300) {
  switch (m.family) {
    case Family::Comb: return comb_truncation_cap(max_magnitude);
    case Family::Chain: {
      auto ok = [&](double v) { return std::isfinite(v) && v <= max_magnitude && v >= 1.0 / max_magnitude; };
      for (std::int64_t r = 0; r <= chain_limit; ++r)
        if (!ok(m.chain->rate(r)) || !ok(m.chain->measure(r))) return std::max<std::int64_t>(r - 1, 0);
      return chain_limit;
    }
    case Family::Finite: {
      const auto all = m.graph.vertices();
      auto dist = hop_distances(m.graph, all, m.root);
      std::int64_t ecc = 0;
      for (const auto& [x, d] : dist) ecc = std::max<std::int64_t>(ecc, d);
      return ecc;
    }
  }
  return 0;
}

// Truncation parameters for a reference exhaustion starting at `from`:
// consecutive for the comb and finite graphs, growing by about 1/8 per step
// for chains, up to max_truncation.
inline std::vector<std::int64_t> reference_tags(const Model& m, std::int64_t from,
                                                std::int64_t chain_limit = 2000) {
  const std::int64_t cap = max_truncation(m, chain_limit);
  std::vector<std::int64_t> tags;
  for (std::int64_t t = from; t <= cap;
       t += m.family == Family::Chain ? std::max<std::int64_t>(1, t / 8) : 1)
    tags.push_back(t);
  return tags;
}

}  // namespace nlab
