#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace nlab;
using Catch::Approx;

namespace {

std::vector<std::int64_t> span_tags(std::int64_t a, std::int64_t b, std::int64_t step = 1) {
  std::vector<std::int64_t> out;
  for (std::int64_t t = a; t <= b; t += step) out.push_back(t);
  return out;
}

}  // namespace

TEST_CASE("Dirichlet reference on a finite graph is exact at the full truncation") {
  const Model m = make_model("random:30", 3);
  const Exhaustion ex = make_exhaustion(m, span_tags(0, max_truncation(m)));
  const VertexFunction phi = VertexFunction::indicator(m.root);
  const ReferenceResult ref = dirichlet_reference(ex, 1.0, phi, 1e-300);
  CHECK(ref.exact);
  CHECK(ref.domain.size() == 30);
  const SemigroupEngine full(assemble_dirichlet(m.graph, ex.level(ex.levels() - 1)));
  CHECK((ref.values - full.heat(1.0, full.op().restrict(phi))).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("Dirichlet reference on the unit chain") {
  const Model m = make_model("bd:unit");
  const Exhaustion ex = make_exhaustion(m, span_tags(5, 60));
  const ReferenceResult ref = dirichlet_reference(ex, 1.0, VertexFunction::indicator(0), 1e-8);
  CHECK(ref.last_increment < 1e-8);
  for (std::size_t i = 0; i + 1 < ref.increments.size(); ++i)
    CHECK(ref.increments[i + 1] <= ref.increments[i]);

  const ReferenceResult zero = dirichlet_reference(ex, 0.0, VertexFunction::indicator(0), 1e-8);
  CHECK(zero.values[0] == 1.0);
  CHECK(zero.values.tail(zero.values.size() - 1).cwiseAbs().maxCoeff() == 0.0);

  const Exhaustion short_ex = make_exhaustion(m, span_tags(1, 4));
  try {
    dirichlet_reference(short_ex, 1.0, VertexFunction::indicator(0), 1e-12);
    FAIL("expected TruncationInsufficient");
  } catch (const TruncationInsufficient& e) {
    CHECK(e.last_increment() > 1e-12);
  }
  CHECK_THROWS_AS(dirichlet_reference(ex, 1.0, VertexFunction::indicator(0, -1.0)), DomainError);
}

TEST_CASE("Neumann convergence on a finite graph reaches zero at the full graph") {
  const Model m = make_model("random:40", 5);
  const std::int64_t ecc = max_truncation(m);
  const Exhaustion ex = make_exhaustion(m, span_tags(0, ecc));
  const VertexFunction phi = VertexFunction::indicator(m.root);
  const ReferenceResult ref = neumann_reference(ex, ex.levels() - 1, 1.0, phi);
  CHECK(ref.exact);
  ExperimentOptions opt;
  opt.alpha = 1.0;
  const ConvergenceReport rep = neumann_convergence_experiment(ex, 1.0, phi, ref, opt);
  CHECK(rep.l2_distance.back() == 0.0);
  CHECK(rep.l1_distance.back() == 0.0);
  CHECK(rep.pairings_monotone);
  CHECK(rep.tags.size() == rep.l1_distance.size());
  for (double d : rep.l1_distance) CHECK(d >= 0.0);
}

TEST_CASE("Neumann convergence on the comb") {
  const Model m = make_model("comb");
  const Exhaustion ex = make_exhaustion(m, span_tags(2, 6));
  const VertexFunction phi = VertexFunction::indicator(m.root);
  const Exhaustion rex = make_exhaustion(m, {9, 10});
  const ReferenceResult ref = neumann_reference(rex, 1, 1.0, phi);
  REQUIRE(ref.self_consistency);
  ExperimentOptions opt;
  opt.alpha = 1.0;
  const ConvergenceReport rep = neumann_convergence_experiment(ex, 1.0, phi, ref, opt);
  CHECK(rep.decreasing);
  CHECK(rep.pairings_monotone);
  CHECK(rep.reference_size == 231);
  for (std::size_t k = 0; k < rep.variational.size(); ++k) {
    const double f2 = 1.0;  // ‖1_{(0,0)}‖² with m(0,0) = 1
    CHECK(rep.variational[k] == Approx(f2 / 1.0 - rep.pairings[k]).epsilon(1e-9));
  }
}

TEST_CASE("references must cover the iterates") {
  const Model m = make_model("bd:unit");
  const Exhaustion ex = make_exhaustion(m, span_tags(10, 20, 5));
  const Exhaustion small = make_exhaustion(m, {4, 5});
  const ReferenceResult ref = neumann_reference(small, 1, 1.0, VertexFunction::indicator(0));
  CHECK_THROWS_AS(neumann_convergence_experiment(ex, 1.0, VertexFunction::indicator(0), ref), ParameterError);
  const ReferenceResult same = neumann_reference(ex, ex.levels() - 1, 1.0, VertexFunction::indicator(0));
  CHECK_THROWS_AS(neumann_convergence_experiment(ex, 1.0, VertexFunction::indicator(0), same), ParameterError);
}

TEST_CASE("Neumann reference self-consistency tolerance") {
  const Model m = make_model("bd:unit");
  const Exhaustion ex = make_exhaustion(m, {3, 4});
  CHECK_THROWS_AS(neumann_reference(ex, 1, 1.0, VertexFunction::indicator(0), 1e-12), TruncationInsufficient);
  CHECK_NOTHROW(neumann_reference(ex, 1, 1.0, VertexFunction::indicator(0), 1.0));
}

TEST_CASE("Dirichlet gap: finite graph, comb and the non-uniqueness regime") {
  {
    const Model m = make_model("path:12");
    const Exhaustion ex = make_exhaustion(m, span_tags(0, 11));
    const VertexFunction phi = VertexFunction::indicator(0);
    const ReferenceResult ref = dirichlet_reference(make_exhaustion(m, {11}), 1.0, phi);
    const ConvergenceReport rep = dirichlet_gap_experiment(ex, 1.0, phi, ref);
    CHECK(rep.l1_distance.back() <= 1e-15);
  }
  {
    const Model m = make_model("comb");
    const VertexFunction phi = VertexFunction::indicator(m.root);
    const ReferenceResult ref = dirichlet_reference(make_exhaustion(m, span_tags(7, 22)), 1.0, phi);
    const ConvergenceReport rep = dirichlet_gap_experiment(make_exhaustion(m, span_tags(2, 6)), 1.0, phi, ref);
    CHECK(decreasing_in_last(rep.l1_distance, 4));
  }
  {
    const Model m = make_model("bd:geo");
    const VertexFunction phi = VertexFunction::indicator(0);
    const ReferenceResult ref = dirichlet_reference(make_exhaustion(m, reference_tags(m, 41)), 1.0, phi);
    const ConvergenceReport rep = dirichlet_gap_experiment(make_exhaustion(m, span_tags(10, 40, 10)), 1.0, phi, ref);
    CHECK(rep.persistent_floor);
    CHECK(rep.floor > rep.floor_threshold);
    CHECK(rep.floor_threshold == Approx(1e-6));
  }
}

TEST_CASE("l1 defect: complete and incomplete chains") {
  const VertexFunction phi = VertexFunction::indicator(0);
  {
    const Model m = make_model("bd:unit");
    const ReferenceResult ref = dirichlet_reference(make_exhaustion(m, reference_tags(m, 61)), 1.0, phi);
    const ConvergenceReport rep = l1_defect_experiment(make_exhaustion(m, span_tags(10, 60, 10)), 1.0, phi, ref);
    REQUIRE(rep.defect);
    CHECK(std::abs(*rep.defect) <= 1e-8);
    for (std::size_t k = 0; k < rep.bound.size(); ++k) CHECK(rep.l1_distance[k] <= rep.bound[k] + 1e-9);
    CHECK(rep.l1_distance.back() < 1e-3);
    CHECK(rep.bound.back() < 1e-12);
  }
  {
    const Model m = make_model("bd:explosive");
    const ReferenceResult ref = dirichlet_reference(make_exhaustion(m, reference_tags(m, 51)), 1.0, phi);
    const ConvergenceReport rep = l1_defect_experiment(make_exhaustion(m, span_tags(10, 50, 10)), 1.0, phi, ref);
    CHECK(*rep.defect > 0.01);
    for (double d : rep.l1_distance) CHECK(d >= *rep.defect - 1e-9);
    for (std::size_t k = 0; k < rep.bound.size(); ++k) CHECK(rep.l1_distance[k] <= rep.bound[k] + 1e-9);
  }
  {
    const Model m = make_model("path:8");
    const ReferenceResult ref = dirichlet_reference(make_exhaustion(m, {7}), 1.0, phi);
    const ConvergenceReport rep = l1_defect_experiment(make_exhaustion(m, span_tags(0, 7)), 1.0, phi, ref);
    CHECK(std::abs(*rep.defect) <= 1e-14);
    CHECK(rep.l1_distance.back() <= 1e-14);
  }
  {
    FiniteGraph::Builder b("killed");
    b.add_vertex(0, 1.0, 0.5);
    b.add_vertex(1, 1.0);
    b.add_edge(0, 1, 1.0);
    const WeightedGraph g = b.build();
    const Exhaustion ex(g, {{0}, {0, 1}});
    const ReferenceResult ref = dirichlet_reference(ex, 1.0, phi);
    CHECK_THROWS_AS(l1_defect_experiment(ex, 1.0, phi, ref), DomainError);
  }
}

TEST_CASE("Dirichlet truncations increase along the exhaustion") {
  const Model m = make_model("random:50", 12);
  const Exhaustion ex = make_exhaustion(m, span_tags(1, max_truncation(m)));
  const VertexFunction phi = VertexFunction::indicator(m.root);
  Eigen::VectorXd prev;
  for (std::size_t k = 0; k < ex.levels(); ++k) {
    SemigroupEngine e(assemble_dirichlet(m.graph, ex.level(k)));
    const Eigen::VectorXd u = e.heat(0.7, e.op().restrict(phi));
    if (prev.size()) CHECK((u.head(prev.size()) - prev).minCoeff() >= -1e-11);
    prev = u;
  }
}

TEST_CASE("report helpers") {
  CHECK(decreasing_in_last({5, 4, 3, 2, 1}, 4));
  CHECK_FALSE(decreasing_in_last({5, 4, 3, 3, 1}, 4));
  CHECK(decreasing_in_last({9, 10, 4, 3, 2, 1}, 4));
  CHECK(nonincreasing({1.0, 1.0 + 1e-12, 0.5}, 1e-10));
  CHECK_FALSE(nonincreasing({1.0, 1.1}, 1e-10));
}
