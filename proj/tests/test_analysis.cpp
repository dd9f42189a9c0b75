#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace nlab;
using Catch::Approx;

namespace {

std::vector<std::int64_t> span_tags(std::int64_t a, std::int64_t b) {
  std::vector<std::int64_t> out;
  for (std::int64_t t = a; t <= b; ++t) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("Feller estimate: finite graph has a vacuous outer region") {
  const Model m = make_model("random:40", 2);
  const Exhaustion ex = make_exhaustion(m, span_tags(0, max_truncation(m)));
  const FellerReport rep = feller_estimate(ex, 1.0, m.root);
  REQUIRE(!rep.sup_outside.empty());
  CHECK(rep.sup_outside.back() == 0.0);
  CHECK(rep.reference.exact);
  for (double s : rep.sup_outside) CHECK(s >= 0.0);
  CHECK_THROWS_AS(feller_estimate(ex, 0.0, m.root), DomainError);
  CHECK_THROWS_AS(feller_estimate(ex, 1.0, 39 + 1000), ParameterError);
}

TEST_CASE("Feller estimate: comb profile under the majorant") {
  const Model m = make_model("comb");
  const Exhaustion ex = make_exhaustion(m, span_tags(0, 14));
  const FellerReport rep = feller_estimate(ex, 1.0, m.root);
  CHECK(rep.hint == VerdictHint::DecayObserved);
  const double C = rep.reference.values[0] / comb_majorant_profile(0, 0);
  for (std::size_t i = 0; i < rep.reference.domain.size(); ++i) {
    auto [k, n] = comb_coords(rep.reference.domain[i]);
    CHECK(rep.reference.values[static_cast<Eigen::Index>(i)] <= C * comb_majorant_profile(k, n) + 1e-9);
  }
}

TEST_CASE("Feller estimate: cubic rates with unit measure decay") {
  const Model m = make_model("bd:expr", 1, "(r+1)^3", "1");
  const Exhaustion ex = make_exhaustion(m, span_tags(0, 200));
  FellerOptions dirichlet;
  dirichlet.tol = 1e-5;
  const FellerReport rep = feller_estimate(ex, 1.0, 0, dirichlet);
  CHECK(rep.hint == VerdictHint::DecayObserved);
  for (std::size_t r = 0; r + 1 < rep.sup_outside.size(); ++r) CHECK(rep.sup_outside[r + 1] <= rep.sup_outside[r]);

}

TEST_CASE("Feller estimate: Neumann variant on the unit chain") {
  const Model m = make_model("bd:unit");
  FellerOptions neumann;
  neumann.kind = Restriction::Neumann;
  neumann.tol = 1e-10;
  const FellerReport rep = feller_estimate(make_exhaustion(m, span_tags(0, 60)), 1.0, 0, neumann);
  CHECK(rep.reference.self_consistency.value() < 1e-10);
  CHECK(rep.hint == VerdictHint::DecayObserved);
  CHECK_THROWS_AS(feller_estimate(make_exhaustion(m, span_tags(0, 3)), 1.0, 0, neumann), TruncationInsufficient);
}

TEST_CASE("semigroup gap") {
  {
    const Model m = make_model("random:30", 4);
    const Exhaustion ex = make_exhaustion(m, span_tags(0, max_truncation(m)));
    const GapResult gap = semigroup_gap(ex, 1.0, m.root);
    CHECK(gap.values.cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(semigroup_gap(ex, 0.0, m.root), DomainError);
  }
  {
    const Model m = make_model("bd:geo");
    const Exhaustion ex = make_exhaustion(m, {59, 60});
    const GapResult gap = semigroup_gap(ex, 1.0, 0);
    CHECK(gap.at_source > 1e-6);
    CHECK(gap.min >= -1e-10);
  }
  {
    const Model m = make_model("comb");
    const Exhaustion ex = make_exhaustion(m, span_tags(3, 22));
    const GapResult coarse = semigroup_gap(ex, 1.0, m.root, 1e-3);
    const GapResult fine = semigroup_gap(ex, 1.0, m.root, 1e-8);
    CHECK(fine.dirichlet.tag > coarse.dirichlet.tag);
    CHECK(fine.at_source < coarse.at_source);
    CHECK(fine.min >= -1e-10);
  }
}

TEST_CASE("gap function solves the heat equation away from the boundary") {
  const Model m = make_model("bd:geo");
  const Exhaustion ex = make_exhaustion(m, {59, 60});
  const double t = 1.0, h = 1e-4;
  const GapResult mid = semigroup_gap(ex, t, 0);
  const GapResult before = semigroup_gap(ex, t - h, 0);
  const GapResult after = semigroup_gap(ex, t + h, 0);
  const VertexFunction u = mid.function();
  for (VertexId x = 0; x <= 5; ++x) {
    const double dt = (after.values[x] - before.values[x]) / (2.0 * h);
    CHECK(std::abs(formal_laplacian(m.graph, u, x) + dt) <= 1e-7);
  }
}

TEST_CASE("minimum principle lower bound") {
  const WeightedGraph p = test::path(3);
  CHECK(minimum_principle_lower_bound(p, 0.0, 1) == 1.0);
  CHECK(minimum_principle_lower_bound(p, 1.0, 1) == Approx(std::exp(-2.0)));
  FiniteGraph::Builder b("single");
  b.add_vertex(0, 1.0);
  CHECK(minimum_principle_lower_bound(b.build(), 5.0, 0) == 1.0);
  CHECK_THROWS_AS(minimum_principle_lower_bound(p, -1.0, 1), DomainError);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightedGraph g = test::random_graph(30, seed, 0.3);
    const VertexSet ball = hop_ball(g, 0, 2);
    for (Restriction kind : {Restriction::Dirichlet, Restriction::Neumann}) {
      const SemigroupEngine e(assemble(g, ball, kind));
      for (double t : {0.1, 1.0, 3.0})
        CHECK(e.heat_apply(t, VertexFunction::indicator(0))(0) >= minimum_principle_lower_bound(g, t, 0) - 1e-10);
    }
  }
}

TEST_CASE("edge condition constant") {
  const Model unit = make_model("bd:unit");
  CHECK(ec_constant(unit.graph, truncation_set(unit, 20)) == 1.0);
  FiniteGraph::Builder b("single");
  b.add_vertex(0, 1.0);
  const WeightedGraph single = b.build();
  CHECK(ec_constant(single, VertexSet{0}) == 0.0);
  const WeightedGraph comb = make_comb();
  double prev = 0.0;
  for (std::int64_t N = 1; N <= 8; ++N) {
    VertexSet base;
    for (std::int64_t n = 0; n <= N; ++n) base.push_back(comb_id(0, n));
    const double c = ec_constant(comb, base);
    CHECK(c == Approx(std::ldexp(1.0, static_cast<int>(2 * (N + 1) + 2 * N - 1))));
    CHECK(c > prev);
    prev = c;
  }
}

TEST_CASE("uniform l1 bound") {
  const WeightedGraph p = test::path(5);
  const VertexSet all = p.vertices();
  CHECK(uniform_l1_check(p, all, 0.0, VertexFunction::indicator(1)).value == 0.0);
  FiniteGraph::Builder b("single");
  b.add_vertex(0, 1.0);
  const WeightedGraph single = b.build();
  CHECK(uniform_l1_check(single, VertexSet{0}, 2.0, VertexFunction::indicator(0)).value == Approx(0.0).margin(1e-15));
  const UniformL1Result r = uniform_l1_check(p, all, 1.0, VertexFunction::indicator(1), 64);
  CHECK(r.bound == Approx(4.0));
  CHECK(r.value <= r.bound);
  CHECK(r.slack > 0.0);
  CHECK_THROWS_AS(uniform_l1_check(p, all, 1.0, VertexFunction::indicator(1), 0), ParameterError);
}

TEST_CASE("Laplace transform of the semigroup matches the resolvent") {
  for (std::uint64_t seed : {3u, 8u}) {
    const WeightedGraph g = test::random_graph(120, seed, 0.2);
    for (Restriction kind : {Restriction::Dirichlet, Restriction::Neumann}) {
      const SemigroupEngine e(assemble(g, hop_ball(g, 0, 3), kind));
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.op().size()));
      delta[0] = 1.0 / e.op().measure()[0];
      const Eigen::VectorXd direct = e.resolvent(1.0, delta);
      CHECK((laplace_resolvent(e, 1.0, delta) - direct).cwiseAbs().maxCoeff() <= 1e-6);
    }
  }
}

TEST_CASE("resolvent symmetry") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const WeightedGraph g = test::random_graph(40, seed, 0.3);
    const RestrictedOperator op = assemble_dirichlet(g, hop_ball(g, 0, 2));
    const ResolventSolver solver(op, 0.6);
    const auto n = static_cast<Eigen::Index>(op.size());
    Eigen::MatrixXd r(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
      Eigen::VectorXd delta = Eigen::VectorXd::Zero(n);
      delta[x] = 1.0 / op.measure()[x];
      r.col(x) = solver.solve(delta);
    }
    const Eigen::VectorXd& m = op.measure();
    for (Eigen::Index x = 0; x < n; ++x)
      for (Eigen::Index y = 0; y < n; ++y) {
        CHECK(std::abs(r(y, x) - r(x, y)) <= 1e-10);
        // The same statement for indicators: R1_x = m(x) Rδ_x.
        CHECK(std::abs(m[y] * m[x] * r(y, x) - m[x] * m[y] * r(x, y)) <= 1e-10);
      }
  }
}
