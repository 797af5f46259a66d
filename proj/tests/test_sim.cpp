#include <doctest.h>

#include <cmath>
#include <sstream>

#include "memkit/error.hpp"
#include "memkit/sim.hpp"
#include "support.hpp"

using namespace memkit;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double max_device_residual(const SemiExplicitDAE& dae, const VectorXd& z, double t) {
  VectorXd r = dae.residual(z, t);
  return r.tail(dae.size() - dae.dynamic_size()).lpNorm<Eigen::Infinity>();
}

}  // namespace

TEST_CASE("newton on scalar problems") {
  SolverConfig c;
  ResidualFn f = [](const VectorXd& x) { return VectorXd::Constant(1, x(0) * x(0) - 4); };
  JacobianFn j = [](const VectorXd& x) { return MatrixXd::Constant(1, 1, 2 * x(0)); };
  NewtonResult r = newton_solve(f, j, VectorXd::Constant(1, 3), c);
  CHECK(r.z(0) == doctest::Approx(2).epsilon(1e-14));
  CHECK(r.residual_norm <= c.newton_tol);

  ResidualFn lin = [](const VectorXd& x) { return VectorXd::Constant(1, 3 * x(0) - 6); };
  JacobianFn dlin = [](const VectorXd&) { return MatrixXd::Constant(1, 1, 3); };
  r = newton_solve(lin, dlin, VectorXd::Zero(1), c);
  CHECK(r.iterations == 1);
  CHECK(r.z(0) == doctest::Approx(2));

  JacobianFn zero = [](const VectorXd&) { return MatrixXd::Zero(1, 1); };
  CHECK_THROWS_AS(newton_solve(f, zero, VectorXd::Constant(1, 3), c), NewtonError);

  c.newton_max_iter = 2;
  CHECK_THROWS_AS(newton_solve(f, j, VectorXd::Constant(1, 1000), c), NewtonError);
}

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.h = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.newton_tol = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SolverConfig{};
  c.newton_max_iter = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("consistent initialization") {
  SolverConfig c;
  SemiExplicitDAE gc(testing::load_fixture("gc.ckt"));
  VectorXd z = consistent_init(gc, gc.initial_dynamic_state(), 0, c);
  CHECK(z(0) == 2);
  CHECK(z(1) == doctest::Approx(2));
  CHECK(z(2) == doctest::Approx(-4));

  z = consistent_init(gc, VectorXd::Zero(1), 0, c);
  CHECK(z.norm() == 0.0);

  SemiExplicitDAE vc(parse_netlist("V1 1 0 dc 1\nC1 1 0 2"));
  try {
    consistent_init(vc, VectorXd::Zero(1), 0, c);
    FAIL("expected refusal");
  } catch (const AnalysisRefusal& e) {
    CHECK(std::string(e.what()).find("{V1, C1}") != std::string::npos);
  }
  SemiExplicitDAE il(testing::load_fixture("degenerate/i_l_cutset.ckt"));
  CHECK_THROWS_AS(consistent_init(il, VectorXd::Zero(il.dynamic_size()), 0, c), AnalysisRefusal);
}

TEST_CASE("one backward Euler step") {
  SemiExplicitDAE dae(parse_netlist("G1 1 0 1\nC1 1 0 1"));
  SolverConfig c;
  c.h = 0.1;
  VectorXd z0 = consistent_init(dae, VectorXd::Ones(1), 0, c);
  int iters = 0;
  VectorXd z1 = step_backward_euler(dae, z0, 0, c, &iters);
  CHECK(z1(1) == doctest::Approx(1 / 1.1).epsilon(1e-13));
  CHECK(iters >= 1);

  c.h = 1e-8;
  z1 = step_backward_euler(dae, z0, 0, c);
  CHECK(std::abs(z1(0) - z0(0)) <= 2e-8);
}

TEST_CASE("G parallel C decays exponentially") {
  SemiExplicitDAE dae(parse_netlist("G1 1 0 1\nC1 1 0 1"));
  SolverConfig c;
  c.h = 1e-3;
  Trace tr = simulate(dae, VectorXd::Ones(1), 0, 1, c);
  CHECK(tr.times.size() == 1001);
  CHECK(tr.times.back() == doctest::Approx(1));
  CHECK(std::abs(tr.states.back()(1) - std::exp(-1.0)) <= 1e-3);

  // first order: the error drops tenfold with the step
  auto error = [&](double h) {
    SolverConfig k;
    k.h = h;
    return std::abs(simulate(dae, VectorXd::Ones(1), 0, 1, k).states.back()(1) - std::exp(-1.0));
  };
  double ratio = error(1e-2) / error(1e-3);
  CHECK(ratio >= 8);
  CHECK(ratio <= 12);
}

TEST_CASE("chua memristor stays on its characteristic") {
  SemiExplicitDAE dae(testing::load_fixture("chua_m_drive.ckt"));
  SolverConfig c;
  c.h = 1e-2;
  const int mq = *dae.circuit().find_branch("MQ1");
  double worst = 0.0;
  integrate(dae, dae.initial_dynamic_state(), 0, 5, c, [&](double t, const VectorXd& z) {
    Point p = dae.branch_point(z, t, mq);
    worst = std::max(worst, std::abs(p.v - (1 + p.q * p.q) * p.i));
  });
  CHECK(worst <= 10 * c.newton_tol);
}

TEST_CASE("algebraic rows hold along every trace") {
  SolverConfig c;
  c.h = 1e-2;
  for (const std::string& name : testing::nondegenerate_fixtures()) {
    INFO(name);
    SemiExplicitDAE dae(testing::load_fixture(name));
    double worst = 0.0;
    integrate(dae, dae.initial_dynamic_state(), 0, 2, c,
              [&](double t, const VectorXd& z) { worst = std::max(worst, max_device_residual(dae, z, t)); });
    CHECK(worst <= 10 * c.newton_tol);
  }
}

TEST_CASE("trace csv") {
  SemiExplicitDAE dae(testing::load_fixture("gc.ckt"));
  SolverConfig c;
  c.h = 0.5;
  Trace tr = simulate(dae, dae.initial_dynamic_state(), 0, 1, c);
  std::ostringstream s;
  tr.write_csv(s);
  std::istringstream in(s.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,q(C1),e(1),i(C1)");
  std::getline(in, line);
  CHECK(line == "0,2,2,-4");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("step count covers t_stop") {
  SemiExplicitDAE dae(testing::load_fixture("rc.ckt"));
  SolverConfig c;
  c.h = 0.3;
  Trace tr = simulate(dae, dae.initial_dynamic_state(), 0, 1, c);
  CHECK(tr.times.size() == 5);
  CHECK(tr.times.back() == doctest::Approx(1.2));
}

TEST_CASE("domain failures carry the step time") {
  SemiExplicitDAE dae(parse_netlist("V1 1 0 sine 3 0.1\nR1 1 2 expr asin(i)\nC1 2 0 1"));
  SolverConfig c;
  c.h = 0.1;
  try {
    simulate(dae, VectorXd::Zero(1), 0, 10, c);
    FAIL("expected failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("t=") != std::string::npos);
  }
}
