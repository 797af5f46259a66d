#include <doctest.h>

#include <random>

#include "memkit/error.hpp"
#include "memkit/index.hpp"
#include "support.hpp"

using namespace memkit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

Pencil pencil(MatrixXd e, MatrixXd f) { return Pencil{std::move(e), std::move(f)}; }

MatrixXd mat(int r, int c, std::initializer_list<double> v) {
  MatrixXd m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

}  // namespace

TEST_CASE("nullspace projectors") {
  CHECK(nullspace_projector(MatrixXd::Identity(3, 3), kDefaultRankTol).norm() == 0.0);
  CHECK((nullspace_projector(mat(2, 2, {1, 0, 0, 0}), kDefaultRankTol) - mat(2, 2, {0, 0, 0, 1})).norm() < 1e-15);
  CHECK((nullspace_projector(mat(2, 2, {1, 1, 1, 1}), kDefaultRankTol) - mat(2, 2, {0.5, -0.5, -0.5, 0.5})).norm() <
        1e-14);

  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXd a = MatrixXd::NullaryExpr(4, 3, [&] { return n(rng); }) * MatrixXd::NullaryExpr(3, 6, [&] { return n(rng); });
    for (MatrixXd q : {nullspace_projector(a, kDefaultRankTol), oblique_nullspace_projector(a, kDefaultRankTol, 9)}) {
      CHECK((q * q - q).norm() < 1e-10);
      CHECK((a * q).norm() < 1e-10 * a.norm());
      CHECK(numerical_rank(q, kDefaultRankTol) == 3);
    }
  }
}

TEST_CASE("kernel basis edge cases") {
  CHECK(kernel_basis(MatrixXd(3, 0), kDefaultRankTol).size() == 0);
  CHECK(kernel_basis(MatrixXd(0, 2), kDefaultRankTol) == MatrixXd::Identity(2, 2));
  CHECK(numerical_rank(MatrixXd::Zero(2, 2), kDefaultRankTol) == 0);
  CHECK(condition_number(MatrixXd::Identity(2, 2)) == 1.0);
  CHECK(std::isinf(condition_number(mat(2, 2, {1, 0, 0, 0}))));
}

TEST_CASE("tractability chain examples") {
  TractabilityChain c = tractability_chain(pencil(MatrixXd::Identity(2, 2), mat(2, 2, {1, 2, 3, 4})));
  CHECK(c.index == 0);

  c = tractability_chain(pencil(mat(2, 2, {1, 0, 0, 0}), mat(2, 2, {-1, 0, 0, 1})));
  CHECK(c.index == 1);

  c = tractability_chain(pencil(mat(2, 2, {1, 0, 0, 0}), mat(2, 2, {0, 1, 1, 0})));
  CHECK(c.index == 2);
  CHECK(c.residuals.max() <= 1e-12);

  // nilpotent block of size three
  c = tractability_chain(pencil(mat(3, 3, {0, 1, 0, 0, 0, 1, 0, 0, 0}), MatrixXd::Identity(3, 3)));
  CHECK(c.index == kUnresolvedIndex);
}

TEST_CASE("kronecker oracle examples") {
  CHECK(kronecker_oracle(pencil(MatrixXd::Identity(2, 2), mat(2, 2, {1, 2, 3, 4}))) == 0);
  CHECK(kronecker_oracle(pencil(mat(2, 2, {1, 0, 0, 0}), mat(2, 2, {-1, 0, 0, 1}))) == 1);
  CHECK(kronecker_oracle(pencil(mat(2, 2, {1, 0, 0, 0}), mat(2, 2, {0, 1, 1, 0}))) == 2);
  CHECK(kronecker_oracle(pencil(mat(3, 3, {0, 1, 0, 0, 0, 1, 0, 0, 0}), MatrixXd::Identity(3, 3))) == 3);
  CHECK_THROWS_AS(kronecker_oracle(pencil(mat(2, 2, {1, 0, 0, 0}), MatrixXd::Zero(2, 2))), SingularPencil);

  CHECK(dynamic_degrees_of_freedom(pencil(mat(2, 2, {1, 0, 0, 0}), mat(2, 2, {-1, 0, 0, 1}))) == 1);
  CHECK(dynamic_degrees_of_freedom(pencil(mat(2, 2, {1, 0, 0, 0}), mat(2, 2, {0, 1, 1, 0}))) == 0);
}

TEST_CASE("chain and oracle agree on random index-one and index-two pencils") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 50; ++trial) {
    // T (block-diag{I, N}) S^{-1} style pencils with a random regular
    // transformation; N is 0 (index 1) or a single 2x2 Jordan block (index 2)
    const int want = 1 + trial % 2;
    MatrixXd e = MatrixXd::Zero(5, 5), f = MatrixXd::Zero(5, 5);
    e.topLeftCorner(3, 3).setIdentity();
    f.topLeftCorner(3, 3) = MatrixXd::NullaryExpr(3, 3, [&] { return n(rng); });
    f.bottomRightCorner(2, 2).setIdentity();
    if (want == 2) e(3, 4) = 1;
    MatrixXd t = MatrixXd::NullaryExpr(5, 5, [&] { return n(rng); });
    MatrixXd s = MatrixXd::NullaryExpr(5, 5, [&] { return n(rng); });
    Pencil p{t * e * s, t * f * s};
    CHECK(kronecker_oracle(p) == want);
  }
}

TEST_CASE("index-one test") {
  SemiExplicitDAE gc(parse_netlist("G1 1 0 2\nC1 1 0 1"));
  IndexOneResult r = index_one_test(gc, VectorXd::Zero(gc.size()), 0);
  CHECK(r.index_one);
  CHECK(r.condition == doctest::Approx(MatrixXd(mat(2, 2, {2, 1, -1, 0})).jacobiSvd().singularValues()(0) /
                                       MatrixXd(mat(2, 2, {2, 1, -1, 0})).jacobiSvd().singularValues()(1)));

  SemiExplicitDAE vc(parse_netlist("V1 1 0 dc 1\nC1 1 0 2"));
  CHECK_FALSE(index_one_test(vc, VectorXd::Zero(vc.size()), 0).index_one);

  // negative conductance: still index one, with a passivity warning
  SemiExplicitDAE neg(parse_netlist("G1 1 0 -1\nC1 1 0 1"));
  r = index_one_test(neg, VectorXd::Zero(neg.size()), 0);
  CHECK(r.index_one);
  CHECK_FALSE(r.warnings.empty());
}

TEST_CASE("schur reductions") {
  SemiExplicitDAE gc(parse_netlist("G1 1 0 2\nC1 1 0 1"));
  MatrixXd s = schur_reduced_matrix(gc, VectorXd::Zero(gc.size()), 0, SchurKind::index1);
  CHECK((s - mat(2, 2, {2, 1, -1, 0})).norm() < 1e-15);

  SemiExplicitDAE gl(parse_netlist("G1 1 0 3\nL1 1 0 1"));
  s = schur_reduced_matrix(gl, VectorXd::Zero(gl.size()), 0, SchurKind::index1);
  CHECK(s.rows() == 1);
  CHECK(s(0, 0) == doctest::Approx(3));

  SemiExplicitDAE zero_r(parse_netlist("R1 1 0 0\nC1 1 0 1"));
  CHECK_THROWS_AS(schur_reduced_matrix(zero_r, VectorXd::Zero(zero_r.size()), 0, SchurKind::index1), HypothesisError);

  for (const std::string& name : testing::degenerate_fixtures()) {
    INFO(name);
    SemiExplicitDAE dae(testing::load_fixture(name));
    IndexReport r = analyze(dae);
    CHECK(r.schur_kind == SchurKind::index2);
    CHECK(r.schur_nonsingular);
  }
}

TEST_CASE("graph and svd projectors coincide") {
  for (const std::string& name : testing::wellposed_fixtures()) {
    INFO(name);
    SemiExplicitDAE dae(testing::load_fixture(name));
    CHECK((vcm_kernel_projector(dae, true) - vcm_kernel_projector(dae, false)).norm() < 1e-10);
    CHECK((ilm_kernel_projector(dae, true) - ilm_kernel_projector(dae, false)).norm() < 1e-10);
  }
}

TEST_CASE("verdicts on the fixture corpus") {
  for (const std::string& name : testing::nondegenerate_fixtures()) {
    INFO(name);
    SemiExplicitDAE dae(testing::load_fixture(name));
    AnalysisOptions opts;
    opts.oracle = true;
    IndexReport r = analyze(dae, opts);
    CHECK(r.degeneracy.nondegenerate);
    CHECK(r.index_one);
    CHECK(r.tractability_index == 1);
    CHECK(r.oracle_index == 1);
    CHECK(r.schur_nonsingular);
    CHECK(r.dynamic_dof == r.state_order_sum);
    CHECK(r.chain.residuals.max() <= 1e-10);

    opts.projector = ProjectorKind::oblique;
    opts.point = r.point.z;
    IndexReport ob = analyze(dae, opts);
    CHECK(ob.tractability_index == r.tractability_index);
    CHECK(ob.chain.residuals.max() <= 1e-10);
  }
  for (const std::string& name : testing::degenerate_fixtures()) {
    INFO(name);
    SemiExplicitDAE dae(testing::load_fixture(name));
    AnalysisOptions opts;
    opts.oracle = true;
    IndexReport r = analyze(dae, opts);
    CHECK_FALSE(r.degeneracy.nondegenerate);
    CHECK_FALSE(r.index_one);
    CHECK(r.tractability_index == 2);
    CHECK(r.oracle_index == 2);
    opts.projector = ProjectorKind::oblique;
    CHECK(analyze(dae, opts).tractability_index == 2);
  }
  for (const char* name : {"illposed/v_loop.ckt", "illposed/i_cutset.ckt"}) {
    INFO(name);
    SemiExplicitDAE dae(testing::load_fixture(name));
    AnalysisOptions opts;
    opts.oracle = true;
    IndexReport r = analyze(dae, opts);
    CHECK_FALSE(r.degeneracy.well_posed.ok());
    CHECK(r.tractability_index == kUnresolvedIndex);
    CHECK(r.oracle_error.has_value());
  }
}

TEST_CASE("evaluation points") {
  SemiExplicitDAE gc(testing::load_fixture("gc.ckt"));
  IndexReport r = analyze(gc);
  CHECK(r.point.source == "ic");
  CHECK(r.point.z(1) == doctest::Approx(2));
  CHECK(r.point.z(2) == doctest::Approx(-4));
  CHECK(r.point.residual_norm < 1e-12);

  VectorXd z = parse_point(gc, "# comment\nq(C1) 1\ne(1) 0.5\n");
  CHECK(z(0) == 1);
  CHECK(z(1) == 0.5);
  CHECK(z(2) == 0);
  CHECK_THROWS_AS(parse_point(gc, "q(C9) 1"), ParseError);
  CHECK_THROWS_AS(parse_point(gc, "q(C1) x"), ParseError);

  AnalysisOptions opts;
  opts.point = z;
  CHECK(analyze(gc, opts).point.source == "user");
}
