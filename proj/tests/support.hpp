#pragma once

#include <Eigen/Dense>
#include <memory>
#include <random>

#include "neumann_lab/neumann_lab.hpp"

namespace nlab::test {

// Path 0–1–...–(n-1) with b ≡ 1, m ≡ 1, c ≡ 0.
inline WeightedGraph path(int n) { return make_path(n); }

inline WeightedGraph star(int leaves) {
  FiniteGraph::Builder b("star");
  b.add_vertex(0, 1.0);
  for (int i = 1; i <= leaves; ++i) {
    b.add_vertex(i, 1.0);
    b.add_edge(0, i, 1.0);
  }
  return b.build();
}

inline WeightedGraph random_graph(int n, std::uint64_t seed, double killing_probability = 0.0) {
  RandomGraphOptions opt;
  opt.killing_probability = killing_probability;
  return make_random_graph(n, seed, opt);
}

inline VertexFunction random_function(const WeightedGraph& g, std::uint64_t seed, double lo = -1.0,
                                      double hi = 1.0) {
  std::mt19937_64 rng(seed);
  VertexFunction f;
  for (VertexId x : g.vertices()) f.set(x, uniform(rng, lo, hi));
  return f;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed, double lo = -1.0,
                                     double hi = 1.0) {
  std::mt19937_64 rng(seed);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(rng, lo, hi);
  return v;
}

inline VertexSet all_vertices(const WeightedGraph& g) { return g.vertices(); }

inline VertexSet range(VertexId a, VertexId b) {
  VertexSet s;
  for (VertexId x = a; x <= b; ++x) s.push_back(x);
  return s;
}

}  // namespace nlab::test

namespace nlab::test {

// Birth-death chain with exact rational rates and measures drawn per site:
// b(r) = k_b (r+1)^p / 2^{e_b}, m(r) = k_m / (2^{e_m} (r+1)^q) with small
// random integers and p, q ∈ {0, 1, 2} fixed per chain.
struct RandomChain {
  BdChain chain;
  Rational alpha, u0;
};

inline RandomChain random_chain(std::uint64_t seed, int horizon) {
  std::mt19937_64 rng(seed);
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int p = pick(0, 2), q = pick(0, 2);
  auto rates = std::make_shared<std::vector<Rational>>();
  auto measures = std::make_shared<std::vector<Rational>>();
  for (int r = 0; r <= horizon + 1; ++r) {
    const BigInt s = r + 1;
    rates->push_back(Rational(BigInt(pick(1, 12)) * boost::multiprecision::pow(s, p), BigInt(1) << pick(0, 3)));
    measures->push_back(Rational(BigInt(pick(1, 12)), (BigInt(1) << pick(0, 3)) * boost::multiprecision::pow(s, q)));
  }
  RandomChain out;
  out.chain.name = "random-chain";
  out.chain.exact_rate = [rates](long long r) { return rates->at(static_cast<std::size_t>(r)); };
  out.chain.exact_measure = [measures](long long r) { return measures->at(static_cast<std::size_t>(r)); };
  out.chain.rate = [rates](long long r) { return rates->at(static_cast<std::size_t>(r)).convert_to<double>(); };
  out.chain.measure = [measures](long long r) {
    return measures->at(static_cast<std::size_t>(r)).convert_to<double>();
  };
  out.alpha = Rational(pick(1, 16), 8);
  out.u0 = Rational(pick(1, 9), pick(1, 4)) * (pick(0, 1) ? 1 : -1);
  return out;
}

}  // namespace nlab::test
