#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memkit/nodal.hpp"

namespace memkit {

struct SolverConfig {
  double h = 1e-3;
  double newton_tol = 1e-10;
  int newton_max_iter = 50;
  double rank_tol = 1e-10;

  // Throws std::invalid_argument when an invariant fails.
  void validate() const;
};

struct NewtonResult {
  Eigen::VectorXd z;
  int iterations = 0;
  double residual_norm = 0.0;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

// Full-step Newton until |r|_inf <= newton_tol. Throws NewtonError on a
// singular Jacobian or when newton_max_iter iterations do not suffice.
NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, const Eigen::VectorXd& guess,
                          const SolverConfig& config);

// Solves the algebraic rows for y at (x0, t0) from a zero guess. Refuses
// (AnalysisRefusal) circuits with a VCM-loop or ILM-cutset, naming the
// witness, and circuits whose F22 is singular at the solution.
Eigen::VectorXd consistent_init(const SemiExplicitDAE& dae, const Eigen::VectorXd& x0, double t0,
                                const SolverConfig& config);

// One backward Euler step of size config.h from (z, t).
Eigen::VectorXd step_backward_euler(const SemiExplicitDAE& dae, const Eigen::VectorXd& z, double t,
                                    const SolverConfig& config, int* iterations = nullptr);

struct Trace {
  std::vector<std::string> labels;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;

  // Header "t,<label>,..." then one row per time, 17 significant digits.
  void write_csv(std::ostream& out) const;
};

// Called after every accepted step (and once for the initial point).
using StepObserver = std::function<void(double t, const Eigen::VectorXd& z)>;

// Uniform backward Euler from consistent_init(x0) at t0 up to t_stop, at the
// times t0 + k h. Errors carry the failing time.
void integrate(const SemiExplicitDAE& dae, const Eigen::VectorXd& x0, double t0, double t_stop,
               const SolverConfig& config, const StepObserver& observer);

Trace simulate(const SemiExplicitDAE& dae, const Eigen::VectorXd& x0, double t0, double t_stop,
               const SolverConfig& config);

}  // namespace memkit
