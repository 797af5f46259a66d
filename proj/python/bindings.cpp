#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "memkit/error.hpp"
#include "memkit/index.hpp"
#include "memkit/report.hpp"
#include "memkit/sim.hpp"

namespace py = pybind11;
using namespace memkit;

namespace {

py::dict classification(const Circuit& c) {
  py::dict out;
  for (const Branch& b : c.branches()) {
    Classification k = classify(b.device.cls);
    out[py::str(b.device.name)] = py::dict(py::arg("cls") = std::string(device_prefix(b.device.cls)),
                                           py::arg("differential_order") = k.differential_order,
                                           py::arg("state_order") = k.state_order,
                                           py::arg("controlling") = k.controlling);
  }
  return out;
}

py::object witness(const Circuit& c, const std::optional<Witness>& w) {
  if (!w) return py::none();
  py::list names;
  for (int j : w->branches) names.append(c.branches()[static_cast<std::size_t>(j)].device.name);
  return names;
}

py::dict topology(const Circuit& c) {
  DegeneracyReport r = degeneracy_report(c);
  std::optional<Witness> wp;
  if (!r.well_posed.ok()) wp = r.well_posed.witness;
  return py::dict(py::arg("well_posed") = r.well_posed.ok(), py::arg("well_posed_witness") = witness(c, wp),
                  py::arg("vcm_loop") = witness(c, r.vcm_loop), py::arg("ilm_cutset") = witness(c, r.ilm_cutset),
                  py::arg("nondegenerate") = r.nondegenerate);
}

py::dict index_report(const SemiExplicitDAE& dae, bool oracle, double rank_tol, std::optional<Eigen::VectorXd> point,
                      bool oblique) {
  AnalysisOptions opts;
  opts.oracle = oracle;
  opts.rank_tol = rank_tol;
  opts.point = std::move(point);
  if (oblique) opts.projector = ProjectorKind::oblique;
  IndexReport r;
  {
    py::gil_scoped_release release;
    r = analyze(dae, opts);
  }
  py::dict out;
  out["summary"] = index_summary(dae.circuit(), r);
  out["nondegenerate"] = r.degeneracy.nondegenerate;
  out["point_source"] = r.point.source;
  out["point"] = r.point.z;
  out["index_one"] = r.index_one;
  out["f22_condition"] = r.f22_condition;
  out["tractability_index"] = r.tractability_index == kUnresolvedIndex ? py::object(py::none())
                                                                       : py::object(py::int_(r.tractability_index));
  out["projector_residual"] = r.chain.residuals.max();
  out["oracle_index"] = r.oracle_index ? py::object(py::int_(*r.oracle_index)) : py::object(py::none());
  out["oracle_error"] = r.oracle_error ? py::object(py::str(*r.oracle_error)) : py::object(py::none());
  out["schur_kind"] = r.schur_kind == SchurKind::index1 ? "index1" : "index2";
  out["schur_nonsingular"] = r.schur_nonsingular;
  out["dynamic_dof"] = r.dynamic_dof;
  out["state_order_sum"] = r.state_order_sum;
  out["warnings"] = r.warnings;
  return out;
}

}  // namespace

PYBIND11_MODULE(_memkit, m) {
  m.doc() = "Nodal analysis, index classification and transient simulation of memristive circuits";

  auto error = py::register_exception<Error>(m, "Error");
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<CircuitError>(m, "CircuitError", error);
  py::register_exception<DomainError>(m, "DomainError", error);
  py::register_exception<AnalysisRefusal>(m, "AnalysisRefusal", error);
  py::register_exception<HypothesisError>(m, "HypothesisError", error);
  py::register_exception<NewtonError>(m, "NewtonError", error);
  py::register_exception<SingularPencil>(m, "SingularPencil", error);

  py::class_<SemiExplicitDAE>(m, "Circuit")
      .def(py::init([](const std::string& text) { return SemiExplicitDAE(parse_netlist(text)); }), py::arg("netlist"))
      .def_property_readonly("labels", [](const SemiExplicitDAE& d) { return d.layout().labels(); })
      .def_property_readonly("row_labels", &SemiExplicitDAE::row_labels)
      .def_property_readonly("dynamic_size", &SemiExplicitDAE::dynamic_size)
      .def_property_readonly("size", &SemiExplicitDAE::size)
      .def_property_readonly("branches",
                             [](const SemiExplicitDAE& d) {
                               std::vector<std::string> names;
                               for (const Branch& b : d.circuit().branches()) names.push_back(b.device.name);
                               return names;
                             })
      .def_property_readonly("E", &SemiExplicitDAE::E)
      .def("netlist", [](const SemiExplicitDAE& d) { return to_netlist(d.circuit()); })
      .def("classify", [](const SemiExplicitDAE& d) { return classification(d.circuit()); })
      .def("topology", [](const SemiExplicitDAE& d) { return topology(d.circuit()); })
      .def("initial_state", &SemiExplicitDAE::initial_dynamic_state)
      .def("residual", &SemiExplicitDAE::residual, py::arg("z"), py::arg("t") = 0.0)
      .def("jacobian", [](const SemiExplicitDAE& d, const Eigen::VectorXd& z, double t) { return d.jacobian(z, t).F; },
           py::arg("z"), py::arg("t") = 0.0)
      .def("index", &index_report, py::arg("oracle") = false, py::arg("rank_tol") = kDefaultRankTol,
           py::arg("point") = py::none(), py::arg("oblique") = false)
      .def(
          "simulate",
          [](const SemiExplicitDAE& d, double t_stop, double dt, double newton_tol,
             std::optional<Eigen::VectorXd> x0) {
            SolverConfig c;
            c.h = dt;
            c.newton_tol = newton_tol;
            c.validate();
            Eigen::VectorXd start = x0 ? *x0 : d.initial_dynamic_state();
            if (start.size() != d.dynamic_size()) throw std::invalid_argument("x0 has the wrong size");
            Trace tr;
            {
              py::gil_scoped_release release;
              tr = simulate(d, start, 0.0, t_stop, c);
            }
            Eigen::MatrixXd states(static_cast<Eigen::Index>(tr.states.size()), d.size());
            for (std::size_t k = 0; k < tr.states.size(); ++k)
              states.row(static_cast<Eigen::Index>(k)) = tr.states[k].transpose();
            Eigen::VectorXd times = Eigen::Map<Eigen::VectorXd>(tr.times.data(), static_cast<Eigen::Index>(tr.times.size()));
            return py::make_tuple(times, states);
          },
          py::arg("t_stop") = 1.0, py::arg("dt") = 1e-3, py::arg("newton_tol") = 1e-10, py::arg("x0") = py::none())
      .def("__repr__", [](const SemiExplicitDAE& d) {
        return "<memkit.Circuit with " + std::to_string(d.circuit().branch_count()) + " branches, " +
               std::to_string(d.size()) + " variables>";
      });

  m.def(
      "main",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool in-process; returns (exit code, stdout, stderr).");
}
