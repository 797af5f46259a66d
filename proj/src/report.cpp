#include "memkit/report.hpp"

#include <cstdio>
#include <sstream>

namespace memkit {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x == 0.0 ? 0.0 : x);
  return buf;
}

std::string index_text(int index) { return index == kUnresolvedIndex ? "unresolved" : std::to_string(index); }

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

// "{V1, C1}" -> "V1,C1"
std::string compact(std::string s) {
  std::string out;
  for (char c : s)
    if (c != '{' && c != '}' && c != ' ') out += c;
  return out;
}

}  // namespace

std::string render_classification(const Circuit& circuit, ReportFormat format) {
  std::ostringstream out;
  if (format == ReportFormat::machine) {
    for (const Branch& b : circuit.branches()) {
      Classification c = classify(b.device.cls);
      out << "device=" << b.device.name << " class=" << device_prefix(b.device.cls)
          << " differential_order=" << c.differential_order << " state_order=" << c.state_order << " controlling=\""
          << c.controlling << "\"\n";
    }
    return out.str();
  }
  std::size_t w = 8;
  for (const Branch& b : circuit.branches()) w = std::max(w, b.device.name.size() + 2);
  out << pad("device", w) << pad("class", 22) << pad("diff.order", 12) << pad("state.order", 13) << "controlling\n";
  int total = 0;
  for (const Branch& b : circuit.branches()) {
    Classification c = classify(b.device.cls);
    total += c.state_order;
    out << pad(b.device.name, w) << pad(std::string(device_class_name(b.device.cls)), 22)
        << pad(std::to_string(c.differential_order), 12) << pad(std::to_string(c.state_order), 13) << c.controlling
        << '\n';
  }
  out << "total state order: " << total << '\n';
  return out.str();
}

std::string render_degeneracy(const Circuit& circuit, const DegeneracyReport& r, ReportFormat format) {
  std::ostringstream out;
  std::string wp = "ok";
  if (r.well_posed.kind == WellPosedness::Kind::v_loop) wp = "V-loop " + witness_names(circuit, r.well_posed.witness);
  if (r.well_posed.kind == WellPosedness::Kind::i_cutset)
    wp = "I-cutset " + witness_names(circuit, r.well_posed.witness);
  if (format == ReportFormat::machine) {
    out << "well_posed=" << (r.well_posed.ok() ? "true" : "false") << '\n';
    if (!r.well_posed.ok()) out << "well_posed_witness=" << compact(witness_names(circuit, r.well_posed.witness)) << '\n';
    out << "vcm_loop=" << (r.vcm_loop ? compact(witness_names(circuit, *r.vcm_loop)) : "none") << '\n';
    out << "ilm_cutset=" << (r.ilm_cutset ? compact(witness_names(circuit, *r.ilm_cutset)) : "none") << '\n';
    out << "nondegenerate=" << (r.nondegenerate ? "true" : "false") << '\n';
    return out.str();
  }
  out << "well-posed:  " << wp << '\n';
  out << "VCM-loop:    " << (r.vcm_loop ? witness_names(circuit, *r.vcm_loop) : "none") << '\n';
  out << "ILM-cutset:  " << (r.ilm_cutset ? witness_names(circuit, *r.ilm_cutset) : "none") << '\n';
  out << "topology:    " << (r.nondegenerate ? "nondegenerate" : "degenerate") << '\n';
  return out.str();
}

std::string index_summary(const Circuit& circuit, const IndexReport& r) {
  std::string s;
  if (r.degeneracy.nondegenerate) {
    s = "nondegenerate";
  } else {
    s = "degenerate:";
    if (r.degeneracy.vcm_loop) s += " VCM-loop " + witness_names(circuit, *r.degeneracy.vcm_loop);
    if (r.degeneracy.vcm_loop && r.degeneracy.ilm_cutset) s += ",";
    if (r.degeneracy.ilm_cutset) s += " ILM-cutset " + witness_names(circuit, *r.degeneracy.ilm_cutset);
  }
  return s + "; tractability index " + index_text(r.tractability_index);
}

std::string render_index(const SemiExplicitDAE& dae, const IndexReport& r, ReportFormat format) {
  const Circuit& circuit = dae.circuit();
  std::ostringstream out;
  const char* schur = r.schur_kind == SchurKind::index1 ? "index1" : "index2";
  if (format == ReportFormat::machine) {
    out << render_degeneracy(circuit, r.degeneracy, format);
    out << "point_source=" << r.point.source << '\n';
    out << "point_t=" << num(r.point.t) << '\n';
    out << "point_residual=" << num(r.point.residual_norm) << '\n';
    for (int k = 0; k < dae.size(); ++k)
      out << "point." << dae.layout().labels()[static_cast<std::size_t>(k)] << '=' << num(r.point.z(k)) << '\n';
    out << "index_one=" << (r.index_one ? "true" : "false") << '\n';
    out << "f22_condition=" << num(r.f22_condition) << '\n';
    out << "tractability_index=" << index_text(r.tractability_index) << '\n';
    out << "projector_residual=" << num(r.chain.residuals.max()) << '\n';
    if (r.oracle_index) out << "oracle_index=" << *r.oracle_index << '\n';
    if (r.oracle_error) out << "oracle_error=\"" << *r.oracle_error << "\"\n";
    out << "schur_kind=" << schur << '\n';
    if (r.schur_error) {
      out << "schur_error=\"" << *r.schur_error << "\"\n";
    } else {
      out << "schur_nonsingular=" << (r.schur_nonsingular ? "true" : "false") << '\n';
    }
    out << "structural_projector_deviation=" << num(r.structural_projector_deviation) << '\n';
    out << "dynamic_dof=" << r.dynamic_dof << '\n';
    out << "state_order_sum=" << r.state_order_sum << '\n';
    for (const std::string& w : r.warnings) out << "warning=\"" << w << "\"\n";
    out << "summary=\"" << index_summary(circuit, r) << "\"\n";
    return out.str();
  }
  out << index_summary(circuit, r) << '\n';
  out << render_degeneracy(circuit, r.degeneracy, format);
  out << "evaluation point (" << r.point.source << ", t = " << num(r.point.t)
      << ", algebraic residual " << num(r.point.residual_norm) << "):\n";
  for (int k = 0; k < dae.size(); ++k)
    out << "  " << pad(dae.layout().labels()[static_cast<std::size_t>(k)], 14) << num(r.point.z(k)) << '\n';
  out << "index one:   " << (r.index_one ? "yes" : "no") << " (cond F22 = " << num(r.f22_condition) << ")\n";
  out << "tractability index: " << index_text(r.tractability_index)
      << " (projector residual " << num(r.chain.residuals.max()) << ")\n";
  if (r.oracle_index) {
    out << "kronecker oracle: " << *r.oracle_index
        << (*r.oracle_index == r.tractability_index ? " (agrees)" : " (DISAGREES)") << '\n';
  }
  if (r.oracle_error) out << "kronecker oracle: " << *r.oracle_error << '\n';
  if (r.schur_error) {
    out << "schur reduction (" << schur << "): not available, " << *r.schur_error << '\n';
  } else {
    out << "schur reduction (" << schur << "): " << (r.schur_nonsingular ? "nonsingular" : "singular") << ", "
        << r.schur_matrix.rows() << "x" << r.schur_matrix.cols() << '\n';
  }
  out << "graph vs svd projectors: " << num(r.structural_projector_deviation) << '\n';
  out << "dynamic degrees of freedom: " << r.dynamic_dof << " (sum of state orders " << r.state_order_sum << ")\n";
  for (const std::string& w : r.warnings) out << "warning: " << w << '\n';
  return out.str();
}

}  // namespace memkit
