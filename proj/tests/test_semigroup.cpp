#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace nlab;
using Catch::Approx;

namespace {

SemigroupEngine engine_on(const WeightedGraph& g, Restriction kind = Restriction::Neumann) {
  return SemigroupEngine(assemble(g, g.vertices(), kind));
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace

TEST_CASE("heat semigroup: closed forms") {
  FiniteGraph::Builder b("single");
  b.add_vertex(0, 1.0);
  const SemigroupEngine single = engine_on(b.build());
  for (double t : {0.0, 0.5, 10.0}) CHECK(single.heat(t, Eigen::VectorXd::Ones(1))[0] == Approx(1.0));

  const SemigroupEngine two = engine_on(test::path(2));
  const Eigen::Vector2d v(1.0, 0.0);
  CHECK(two.heat(0.0, v) == v);
  for (double t : {0.1, 1.0, 3.0}) {
    const Eigen::VectorXd u = two.heat(t, v);
    CHECK(u[0] == Approx((1.0 + std::exp(-2.0 * t)) / 2.0).epsilon(1e-13));
    CHECK(u[1] == Approx((1.0 - std::exp(-2.0 * t)) / 2.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(two.heat(-1.0, v), DomainError);
  const Eigen::VectorXd ev = two.eigenvalues();
  CHECK(ev[0] == Approx(0.0).margin(1e-14));
  CHECK(ev[1] == Approx(2.0).epsilon(1e-13));
  CHECK(two.reconstruction_error() <= 1e-9);
}

TEST_CASE("resolvent: closed forms and residual") {
  FiniteGraph::Builder b("single");
  b.add_vertex(0, 1.0);
  const SemigroupEngine single = engine_on(b.build());
  CHECK(single.resolvent(2.0, Eigen::VectorXd::Ones(1))[0] == Approx(0.5));

  const SemigroupEngine two = engine_on(test::path(2));
  const ResolventResult r = two.resolvent_apply(1.0, VertexFunction::indicator(0));
  CHECK(r.solution(0) == Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.solution(1) == Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK_THROWS_AS(two.resolvent(0.0, Eigen::Vector2d(1, 0)), DomainError);
  CHECK_THROWS_AS(two.resolvent(-1.0, Eigen::Vector2d(1, 0)), DomainError);

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightedGraph g = test::random_graph(40, seed, 0.3);
    const SemigroupEngine e = engine_on(g, Restriction::Dirichlet);
    const VertexFunction f = test::random_function(g, seed + 100);
    const ResolventResult res = e.resolvent_apply(0.7, f);
    CHECK(res.residual_norm <= 1e-10 * lp_norm(g, f, 2.0));
  }
}

TEST_CASE("Runge-Kutta oracle") {
  const RestrictedOperator two = assemble_neumann(test::path(2), VertexSet{0, 1});
  const Eigen::Vector2d v(1.0, 0.0);
  CHECK(heat_oracle(two, 0.0, v, 1) == v);
  const Eigen::VectorXd u = heat_oracle(two, 1.0, v, 10000);
  CHECK(std::abs(u[0] - (1.0 + std::exp(-2.0)) / 2.0) <= 1e-10);
  CHECK(std::abs(u[1] - (1.0 - std::exp(-2.0)) / 2.0) <= 1e-10);
  CHECK_THROWS_AS(heat_oracle(two, 1.0, v, 2), ParameterError);

  const WeightedGraph g = test::random_graph(20, 42, 0.3);
  for (Restriction kind : {Restriction::Dirichlet, Restriction::Neumann}) {
    const SemigroupEngine e = engine_on(g, kind);
    const VertexFunction f = test::random_function(g, 5, 0.0, 1.0);
    for (double t : {0.1, 1.0, 5.0}) {
      const VertexFunction a = e.heat_apply(t, f);
      const VertexFunction b = heat_oracle(e.op(), t, f, oracle_steps(e.op(), t));
      for (VertexId x : g.vertices()) CHECK(std::abs(a(x) - b(x)) <= 1e-7);
    }
  }
}

TEST_CASE("semigroup invariants on random graphs") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const WeightedGraph g = test::random_graph(30, seed, 0.0);
    const VertexSet ball = hop_ball(g, 0, 2);
    const SemigroupEngine n(assemble_neumann(g, ball));
    const SemigroupEngine d(assemble_dirichlet(g, ball));
    const auto size = static_cast<Eigen::Index>(ball.size());
    const Eigen::VectorXd u = test::random_vector(size, seed * 3);
    const Eigen::VectorXd w = test::random_vector(size, seed * 5);
    const Eigen::VectorXd phi = test::random_vector(size, seed * 7, 0.0, 1.0);
    for (const SemigroupEngine* e : {&n, &d}) {
      CHECK(e->reconstruction_error() <= 1e-9);
      CHECK(e->eigenvalues().minCoeff() >= -1e-10 * e->eigenvalues().cwiseAbs().maxCoeff());
      CHECK(rel(e->heat(1.3, u), e->heat(0.5, e->heat(0.8, u))) <= 1e-9);
      const double lhs = e->op().inner_product(e->heat(0.9, u), w);
      const double rhs = e->op().inner_product(u, e->heat(0.9, w));
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
      CHECK(e->op().norm2(e->heat(2.0, u)) <= e->op().norm2(u) * (1 + 1e-12));
      CHECK(e->op().norm2(e->resolvent(0.5, u)) <= e->op().norm2(u) / 0.5 * (1 + 1e-12));
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(size);
      delta[0] = 1.0;
      CHECK(e->heat(0.5, delta).minCoeff() > 0.0);
    }
    CHECK(std::abs(n.op().norm1(n.heat(3.0, phi)) - n.op().norm1(phi)) <= 1e-10 * n.op().norm1(phi));
    CHECK(((n.heat(1.0, phi) - d.heat(1.0, phi)).array() >= -1e-10).all());
  }
}

TEST_CASE("variational characterisation of the resolvent") {
  const WeightedGraph g = test::random_graph(25, 9, 0.2);
  const SemigroupEngine e = engine_on(g, Restriction::Neumann);
  const VertexFunction f = test::random_function(g, 4);
  const double alpha = 0.8;
  const ResolventResult r = e.resolvent_apply(alpha, f);
  const double norm2 = lp_norm(g, f, 2.0);
  double pairing = 0.0;
  for (VertexId x : g.vertices()) pairing += r.solution(x) * f(x) * g.measure(x);
  const double expected = norm2 * norm2 / alpha - pairing;
  const double at_min = variational_value(e.op(), alpha, f, r.solution);
  CHECK(std::abs(at_min - expected) <= 1e-9 * std::abs(expected));
  CHECK(variational_value(e.op(), alpha, VertexFunction{}, VertexFunction{}) == 0.0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Eigen::VectorXd p = 1e-3 * test::random_vector(static_cast<Eigen::Index>(g.size().value()), 1000 + s);
    CHECK(variational_value(e.op(), alpha, e.op().restrict(f), r.local + p) > at_min);
  }
}

TEST_CASE("clamping telemetry stays at zero on well-conditioned input") {
  const WeightedGraph g = test::random_graph(15, 2);
  const SemigroupEngine e = engine_on(g);
  e.heat_apply(1.0, VertexFunction::indicator(0));
  CHECK(e.clamp_count() == 0);
}
