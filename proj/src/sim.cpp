#include "memkit/sim.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "memkit/error.hpp"
#include "memkit/index.hpp"
#include "memkit/topology.hpp"

namespace memkit {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void SolverConfig::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton tolerance must be positive");
  if (newton_max_iter < 1) throw std::invalid_argument("newton_max_iter must be at least 1");
  if (!(rank_tol > 0.0)) throw std::invalid_argument("rank tolerance must be positive");
}

NewtonResult newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, const VectorXd& guess,
                          const SolverConfig& config) {
  NewtonResult r;
  r.z = guess;
  VectorXd res = residual(r.z);
  r.residual_norm = res.lpNorm<Eigen::Infinity>();
  while (!(r.residual_norm <= config.newton_tol)) {
    if (r.iterations >= config.newton_max_iter)
      throw NewtonError("newton did not converge in " + std::to_string(r.iterations) + " iterations (residual " +
                            std::to_string(r.residual_norm) + ")",
                        false, r.iterations, r.residual_norm);
    Eigen::FullPivLU<MatrixXd> lu(jacobian(r.z));
    lu.setThreshold(config.rank_tol);
    if (!lu.isInvertible())
      throw NewtonError("singular jacobian at newton iterate " + std::to_string(r.iterations), true, r.iterations,
                        r.residual_norm);
    r.z -= lu.solve(res);
    ++r.iterations;
    res = residual(r.z);
    r.residual_norm = res.lpNorm<Eigen::Infinity>();
    if (!std::isfinite(r.residual_norm))
      throw NewtonError("newton diverged", false, r.iterations, r.residual_norm);
  }
  return r;
}

VectorXd consistent_init(const SemiExplicitDAE& dae, const VectorXd& x0, double t0, const SolverConfig& config) {
  config.validate();
  const int nx = dae.dynamic_size();
  const int ny = dae.size() - nx;
  if (x0.size() != nx) throw std::invalid_argument("initial state has the wrong size");

  DegeneracyReport deg = degeneracy_report(dae.circuit());
  if (deg.vcm_loop) {
    throw AnalysisRefusal("index-two circuit: VCM-loop " + witness_names(dae.circuit(), *deg.vcm_loop) +
                              " makes F22 singular; initialization refused",
                          {witness_names(dae.circuit(), *deg.vcm_loop)});
  }
  if (deg.ilm_cutset) {
    throw AnalysisRefusal("index-two circuit: ILM-cutset " + witness_names(dae.circuit(), *deg.ilm_cutset) +
                              " makes F22 singular; initialization refused",
                          {witness_names(dae.circuit(), *deg.ilm_cutset)});
  }

  VectorXd z = VectorXd::Zero(dae.size());
  z.head(nx) = x0;
  auto res = [&](const VectorXd& y) {
    VectorXd zz = z;
    zz.tail(ny) = y;
    return VectorXd(dae.residual(zz, t0).tail(ny));
  };
  auto jac = [&](const VectorXd& y) {
    VectorXd zz = z;
    zz.tail(ny) = y;
    return MatrixXd(dae.jacobian(zz, t0).F22);
  };
  NewtonResult r;
  try {
    r = newton_solve(res, jac, VectorXd::Zero(ny), config);
  } catch (const NewtonError& e) {
    if (e.singular_jacobian())
      throw AnalysisRefusal(std::string("algebraic subsystem jacobian F22 is singular: ") + e.what(), {});
    throw;
  }
  z.tail(ny) = r.z;
  if (!is_nonsingular(dae.jacobian(z, t0).F22, config.rank_tol))
    throw AnalysisRefusal("algebraic subsystem jacobian F22 is singular at the initial point", {});
  return z;
}

VectorXd step_backward_euler(const SemiExplicitDAE& dae, const VectorXd& z, double t, const SolverConfig& config,
                             int* iterations) {
  const int nx = dae.dynamic_size();
  const double h = config.h;
  const double t1 = t + h;
  const VectorXd x = z.head(nx);
  VectorXd f;
  MatrixXd jac;
  auto res = [&](const VectorXd& w) {
    dae.evaluate(w, t1, f, nullptr);
    f.head(nx) = w.head(nx) - x - h * f.head(nx);
    return f;
  };
  auto jacobian = [&](const VectorXd& w) {
    VectorXd tmp;
    dae.evaluate(w, t1, tmp, &jac);
    jac.topRows(nx) *= -h;
    jac.topLeftCorner(nx, nx).diagonal().array() += 1.0;
    return jac;
  };
  NewtonResult r = newton_solve(res, jacobian, z, config);
  if (iterations) *iterations = r.iterations;
  return r.z;
}

void integrate(const SemiExplicitDAE& dae, const VectorXd& x0, double t0, double t_stop, const SolverConfig& config,
               const StepObserver& observer) {
  VectorXd z = consistent_init(dae, x0, t0, config);
  if (observer) observer(t0, z);
  const auto steps = static_cast<long long>(std::ceil((t_stop - t0) / config.h - 1e-9));
  for (long long k = 0; k < steps; ++k) {
    double t = t0 + static_cast<double>(k) * config.h;
    try {
      z = step_backward_euler(dae, z, t, config);
    } catch (const NewtonError& e) {
      throw NewtonError("step to t=" + std::to_string(t + config.h) + " failed: " + e.what(), e.singular_jacobian(),
                        e.iterations(), e.residual_norm());
    } catch (const DomainError& e) {
      throw DomainError("step to t=" + std::to_string(t + config.h) + " failed: " + e.what());
    }
    if (observer) observer(t0 + static_cast<double>(k + 1) * config.h, z);
  }
}

Trace simulate(const SemiExplicitDAE& dae, const VectorXd& x0, double t0, double t_stop, const SolverConfig& config) {
  Trace trace;
  trace.labels = dae.layout().labels();
  integrate(dae, x0, t0, t_stop, config, [&](double t, const VectorXd& z) {
    trace.times.push_back(t);
    trace.states.push_back(z);
  });
  return trace;
}

void Trace::write_csv(std::ostream& out) const {
  out << 't';
  for (const std::string& l : labels) out << ',' << l;
  out << '\n';
  char buf[32];
  for (std::size_t k = 0; k < times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", times[k]);
    out << buf;
    for (Eigen::Index j = 0; j < states[k].size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", states[k](j) == 0.0 ? 0.0 : states[k](j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace memkit
