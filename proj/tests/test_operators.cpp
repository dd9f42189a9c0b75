#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <sstream>

#include "support.hpp"

using namespace nlab;
using Catch::Approx;

namespace {

bool equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).cwiseAbs().maxCoeff() < 1e-15;
}

Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

TEST_CASE("hand-evaluated restrictions of the path 0-1-2") {
  const WeightedGraph p = test::path(3);
  CHECK(equal(assemble_dirichlet(p, VertexSet{0, 1}).matrix(), mat({{1, -1}, {-1, 2}})));
  CHECK(equal(assemble_dirichlet(p, VertexSet{1}).matrix(), mat({{2}})));
  CHECK(equal(assemble_neumann(p, VertexSet{0, 1}).matrix(), mat({{1, -1}, {-1, 1}})));
  CHECK(equal(assemble_neumann(p, VertexSet{1}).matrix(), mat({{0}})));
}

TEST_CASE("full finite graph: both restrictions coincide") {
  const WeightedGraph g = test::random_graph(20, 5, 0.3);
  const VertexSet all = g.vertices();
  const Eigen::MatrixXd d = assemble_dirichlet(g, all).matrix();
  CHECK(equal(d, assemble_neumann(g, all).matrix()));
  VertexFunction f = test::random_function(g, 9);
  const RestrictedOperator op = assemble_dirichlet(g, all);
  const Eigen::VectorXd lf = op.apply(op.restrict(f));
  for (std::size_t i = 0; i < all.size(); ++i)
    CHECK(lf[static_cast<Eigen::Index>(i)] == Approx(formal_laplacian(g, f, all[i])).margin(1e-12));
}

TEST_CASE("disconnected subsets are rejected") {
  CHECK_THROWS_AS(assemble_dirichlet(test::path(3), VertexSet{0, 2}), ConstructionError);
  CHECK_THROWS_AS(assemble_neumann(test::path(3), VertexSet{}), ConstructionError);
}

TEST_CASE("quadratic forms") {
  const WeightedGraph p = test::path(3);
  const RestrictedOperator n01 = assemble_neumann(p, VertexSet{0, 1});
  VertexFunction one;
  one.set(0, 1.0);
  one.set(1, 1.0);
  CHECK(evaluate_form(n01, one) == 0.0);
  CHECK(evaluate_form(n01, VertexFunction::indicator(0)) == Approx(1.0));
  CHECK(evaluate_form(assemble_dirichlet(p, VertexSet{0, 1}), VertexFunction::indicator(0)) == Approx(1.0));
  CHECK_THROWS_AS(evaluate_form(n01, VertexFunction::indicator(2)), DomainError);

  const WeightedGraph g = test::random_graph(30, 17, 0.3);
  const VertexSet set = hop_ball(g, 0, 2);
  for (Restriction kind : {Restriction::Dirichlet, Restriction::Neumann}) {
    const RestrictedOperator op = assemble(g, set, kind);
    const Eigen::VectorXd f = test::random_vector(static_cast<Eigen::Index>(set.size()), 3);
    const double lf = op.inner_product(op.apply(f), f);
    CHECK(std::abs(op.form(f) - lf) <= 1e-10 * std::max(1.0, std::abs(lf)));
  }
}

TEST_CASE("Neumann Laplacian identity") {
  const WeightedGraph p = test::path(3);
  CHECK(laplacian_identity_check(p, VertexSet{0, 1}, VertexFunction::indicator(1)) <= 1e-12);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightedGraph g = test::random_graph(25, seed, 0.3);
    const VertexSet set = hop_ball(g, 0, 2);
    VertexFunction f;
    std::mt19937_64 rng(seed);
    for (VertexId x : set) f.set(x, uniform(rng, -1.0, 1.0));
    CHECK(laplacian_identity_check(g, set, f) <= 1e-12);
  }
}

TEST_CASE("structural invariants on random truncations") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const WeightedGraph g = test::random_graph(40, seed, 0.2);
    const VertexSet set = hop_ball(g, 0, 2);
    const RestrictedOperator d = assemble_dirichlet(g, set);
    const RestrictedOperator n = assemble_neumann(g, set);
    for (const RestrictedOperator* op : {&d, &n}) {
      const Eigen::MatrixXd a = op->matrix();
      const Eigen::MatrixXd ma = op->measure().asDiagonal() * a;
      CHECK((ma - ma.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * ma.cwiseAbs().maxCoeff());
      for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
          if (i != j) CHECK(a(i, j) <= 0.0);
      const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(op->symmetric_matrix()).eigenvalues();
      CHECK(ev.minCoeff() >= -1e-10 * ev.cwiseAbs().maxCoeff());
    }
    const Eigen::VectorXd gap = d.diagonal() - n.diagonal();
    for (std::size_t i = 0; i < set.size(); ++i) {
      const double outside = gap[static_cast<Eigen::Index>(i)] * d.measure()[static_cast<Eigen::Index>(i)];
      CHECK(outside == Approx(d.boundary_weight()[static_cast<Eigen::Index>(i)]));
      const auto b = vertex_boundary(g, set);
      const bool leaves = std::find(b.begin(), b.end(), set[i]) != b.end();
      CHECK((gap[static_cast<Eigen::Index>(i)] > 0.0) == leaves);
    }
  }
}

TEST_CASE("Neumann matrix annihilates constants when c = 0") {
  const WeightedGraph g = test::random_graph(30, 21);
  const RestrictedOperator n = assemble_neumann(g, hop_ball(g, 0, 2));
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n.size()));
  CHECK(n.apply(one).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("Neumann forms increase along an exhaustion") {
  const WeightedGraph g = test::random_graph(40, 4);
  const VertexSet small = hop_ball(g, 0, 1), large = hop_ball(g, 0, 2);
  VertexFunction f;
  std::mt19937_64 rng(8);
  for (VertexId x : small) f.set(x, uniform(rng, -1.0, 1.0));
  CHECK(evaluate_form(assemble_neumann(g, small), f) <= evaluate_form(assemble_neumann(g, large), f) + 1e-12);
}

TEST_CASE("overflowing weights are reported") {
  const WeightedGraph comb = make_comb();
  CHECK_NOTHROW(assemble_dirichlet(comb, comb_rectangle(22)));
  CHECK_THROWS_AS(assemble_dirichlet(comb, comb_rectangle(40)), OverflowError);
}

TEST_CASE("matrix dump") {
  std::ostringstream out;
  dump_matrix(out, assemble_dirichlet(test::path(3), VertexSet{0, 1}));
  const std::string s = out.str();
  CHECK(s.find("# order: 0 1") != std::string::npos);
  CHECK(s.find("1 1 2") != std::string::npos);
  CHECK(s.find("0 1 -1") != std::string::npos);
}
