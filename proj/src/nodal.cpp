#include "memkit/nodal.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "memkit/error.hpp"

namespace memkit {

namespace {

std::size_t sz(int k) { return static_cast<std::size_t>(k); }

// Dynamic blocks each class feeds, in block order.
std::vector<DynamicBlock> dynamic_blocks_of(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::capacitor: return {DynamicBlock::q_c};
    case DeviceClass::memcapacitor: return {DynamicBlock::q_mc, DynamicBlock::phi_mc};
    case DeviceClass::inductor: return {DynamicBlock::phi_l};
    case DeviceClass::meminductor: return {DynamicBlock::phi_ml, DynamicBlock::q_ml};
    case DeviceClass::q_memristor: return {DynamicBlock::q_m};
    case DeviceClass::hybrid_m: return {DynamicBlock::q_hm, DynamicBlock::phi_hm};
    case DeviceClass::hybrid_w: return {DynamicBlock::q_hw, DynamicBlock::phi_hw};
    case DeviceClass::phi_memristor: return {DynamicBlock::phi_w};
    default: return {};
  }
}

std::optional<AlgebraicBlock> current_block_of(DeviceClass cls) {
  switch (cls) {
    case DeviceClass::capacitor: return AlgebraicBlock::i_c;
    case DeviceClass::memcapacitor: return AlgebraicBlock::i_mc;
    case DeviceClass::voltage_source: return AlgebraicBlock::i_u;
    case DeviceClass::inductor: return AlgebraicBlock::i_l;
    case DeviceClass::meminductor: return AlgebraicBlock::i_ml;
    case DeviceClass::resistor: return AlgebraicBlock::i_r;
    case DeviceClass::q_memristor: return AlgebraicBlock::i_m;
    case DeviceClass::hybrid_m: return AlgebraicBlock::i_hm;
    case DeviceClass::hybrid_w: return AlgebraicBlock::i_hw;
    default: return std::nullopt;  // G, MW, I: current eliminated
  }
}

bool is_charge_block(DynamicBlock b) {
  switch (b) {
    case DynamicBlock::q_c:
    case DynamicBlock::q_mc:
    case DynamicBlock::q_m:
    case DynamicBlock::q_ml:
    case DynamicBlock::q_hm:
    case DynamicBlock::q_hw: return true;
    default: return false;
  }
}

constexpr int kDynamicBlocks = 12;
constexpr int kAlgebraicBlocks = 10;

}  // namespace

VariableLayout::VariableLayout(const Circuit& circuit)
    : dynamic_(kDynamicBlocks),
      algebraic_(kAlgebraicBlocks),
      current_(sz(circuit.branch_count()), -1),
      charge_(sz(circuit.branch_count()), -1),
      flux_(sz(circuit.branch_count()), -1) {
  const auto& branches = circuit.branches();
  for (int b = 0; b < kDynamicBlocks; ++b) {
    auto block = static_cast<DynamicBlock>(b);
    dynamic_[sz(b)].offset = size();
    for (int j = 0; j < circuit.branch_count(); ++j) {
      const Branch& br = branches[sz(j)];
      bool member = false;
      for (DynamicBlock d : dynamic_blocks_of(br.device.cls)) member = member || d == block;
      if (!member) continue;
      if (is_charge_block(block)) {
        charge_[sz(j)] = size();
        labels_.push_back("q(" + br.device.name + ")");
      } else {
        flux_[sz(j)] = size();
        labels_.push_back("phi(" + br.device.name + ")");
      }
    }
    dynamic_[sz(b)].size = size() - dynamic_[sz(b)].offset;
  }
  dynamic_size_ = size();

  algebraic_[0].offset = size();
  for (const std::string& label : circuit.row_labels()) labels_.push_back("e(" + label + ")");
  algebraic_[0].size = size() - algebraic_[0].offset;
  for (int b = 1; b < kAlgebraicBlocks; ++b) {
    auto block = static_cast<AlgebraicBlock>(b);
    algebraic_[sz(b)].offset = size();
    for (int j = 0; j < circuit.branch_count(); ++j) {
      const Branch& br = branches[sz(j)];
      if (current_block_of(br.device.cls) != block) continue;
      current_[sz(j)] = size();
      labels_.push_back("i(" + br.device.name + ")");
    }
    algebraic_[sz(b)].size = size() - algebraic_[sz(b)].offset;
  }
}

std::optional<int> VariableLayout::index_of(std::string_view label) const {
  for (int k = 0; k < size(); ++k)
    if (labels_[sz(k)] == label) return k;
  return std::nullopt;
}

SemiExplicitDAE::SemiExplicitDAE(Circuit circuit)
    : circuit_(std::make_shared<const Circuit>(std::move(circuit))),
      incidence_(reduced_incidence(*circuit_)),
      layout_(*circuit_) {
  row_labels_.resize(sz(layout_.size()));
  for (int k = 0; k < layout_.dynamic_size(); ++k) row_labels_[sz(k)] = layout_.labels()[sz(k)] + "'";
  std::vector<std::string> rows = circuit_->row_labels();
  for (std::size_t r = 0; r < rows.size(); ++r)
    row_labels_[sz(layout_.potential_index(static_cast<int>(r)))] = "kcl(" + rows[r] + ")";
  for (int j = 0; j < circuit_->branch_count(); ++j) {
    int c = layout_.current_index(j);
    if (c >= 0) row_labels_[sz(c)] = circuit_->branches()[sz(j)].device.name;
  }
}

SemiExplicitDAE assemble(const Circuit& circuit) { return SemiExplicitDAE(circuit); }

Eigen::MatrixXd SemiExplicitDAE::E() const {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(size(), size());
  for (int k = 0; k < dynamic_size(); ++k) e(k, k) = 1.0;
  return e;
}

double SemiExplicitDAE::branch_voltage(const Eigen::VectorXd& z, int branch) const {
  const Branch& b = circuit_->branches()[sz(branch)];
  int rf = circuit_->row_of(b.from);
  int rt = circuit_->row_of(b.to);
  double v = 0.0;
  if (rf >= 0) v += z(layout_.potential_index(rf));
  if (rt >= 0) v -= z(layout_.potential_index(rt));
  return v;
}

double SemiExplicitDAE::branch_current(const Eigen::VectorXd& z, double t, int branch) const {
  const DeviceSpec& dev = circuit_->branches()[sz(branch)].device;
  int c = layout_.current_index(branch);
  if (c >= 0) return z(c);
  if (dev.cls == DeviceClass::current_source) return dev.source->eval(t);
  Point p;
  p.v = branch_voltage(z, branch);
  p.t = t;
  int f = layout_.flux_index(branch);
  if (f >= 0) p.phi = z(f);
  return dev.characteristic->eval(p);
}

Point SemiExplicitDAE::branch_point(const Eigen::VectorXd& z, double t, int branch) const {
  Point p;
  p.t = t;
  p.v = branch_voltage(z, branch);
  int qi = layout_.charge_index(branch);
  int fi = layout_.flux_index(branch);
  if (qi >= 0) p.q = z(qi);
  if (fi >= 0) p.phi = z(fi);
  p.i = branch_current(z, t, branch);
  return p;
}

namespace {

// Accumulates f and, optionally, its Jacobian while stamping one branch.
class Stamper {
 public:
  Stamper(const Circuit& circuit, const VariableLayout& layout, Eigen::VectorXd& f, Eigen::MatrixXd* jac)
      : circuit_(circuit), layout_(layout), f_(f), jac_(jac) {}

  void set_branch(int branch) {
    const Branch& b = circuit_.branches()[sz(branch)];
    int rf = circuit_.row_of(b.from);
    int rt = circuit_.row_of(b.to);
    from_ = rf >= 0 ? layout_.potential_index(rf) : -1;
    to_ = rt >= 0 ? layout_.potential_index(rt) : -1;
  }

  void value(int row, double x) { f_(row) += x; }

  void partial(int row, int col, double d) {
    if (jac_ && col >= 0 && d != 0.0) (*jac_)(row, col) += d;
  }

  // d/dz of d * v, v = e_from - e_to
  void voltage_partial(int row, double d) {
    partial(row, from_, d);
    if (to_ >= 0) partial(row, to_, -d);
  }

  // Branch current `i` leaving `from` and entering `to`.
  void kcl(double i) {
    if (from_ >= 0) f_(from_) += i;
    if (to_ >= 0) f_(to_) -= i;
  }
  void kcl_partial(int col, double d) {
    if (from_ >= 0) partial(from_, col, d);
    if (to_ >= 0) partial(to_, col, -d);
  }
  void kcl_voltage_partial(double d) {
    if (from_ >= 0) voltage_partial(from_, d);
    if (to_ >= 0) voltage_partial(to_, -d);
  }

 private:
  const Circuit& circuit_;
  const VariableLayout& layout_;
  Eigen::VectorXd& f_;
  Eigen::MatrixXd* jac_;
  int from_ = -1;
  int to_ = -1;
};

}  // namespace

void SemiExplicitDAE::evaluate(const Eigen::VectorXd& z, double t, Eigen::VectorXd& f, Eigen::MatrixXd* jac) const {
  if (z.size() != size()) throw std::invalid_argument("state vector has the wrong size");
  f = Eigen::VectorXd::Zero(size());
  if (jac) *jac = Eigen::MatrixXd::Zero(size(), size());
  Stamper s(*circuit_, layout_, f, jac);

  for (int j = 0; j < circuit_->branch_count(); ++j) {
    const DeviceSpec& dev = circuit_->branches()[sz(j)].device;
    s.set_branch(j);
    const int cur = layout_.current_index(j);
    const int qi = layout_.charge_index(j);
    const int fi = layout_.flux_index(j);

    Point p;
    p.t = t;
    p.v = branch_voltage(z, j);
    if (cur >= 0) p.i = z(cur);
    if (qi >= 0) p.q = z(qi);
    if (fi >= 0) p.phi = z(fi);

    // q' = i and phi' = v
    if (qi >= 0) {
      s.value(qi, p.i);
      s.partial(qi, cur, 1.0);
    }
    if (fi >= 0) {
      s.value(fi, p.v);
      s.voltage_partial(fi, 1.0);
    }

    if (dev.cls == DeviceClass::current_source) {
      s.kcl(dev.source->eval(t));
      continue;
    }
    if (dev.cls == DeviceClass::voltage_source) {
      s.value(cur, dev.source->eval(t) - p.v);
      s.voltage_partial(cur, -1.0);
      s.kcl(p.i);
      s.kcl_partial(cur, 1.0);
      continue;
    }

    Dual out;
    try {
      out = dev.characteristic->eval_dual(p);
    } catch (const DomainError& e) {
      throw DomainError("device " + dev.name + ": " + e.what());
    }

    switch (dev.cls) {
      case DeviceClass::conductor:
      case DeviceClass::phi_memristor:
        // i = zeta(phi, v), eliminated into the Kirchhoff rows
        s.kcl(out.value);
        s.kcl_partial(fi, out.d(Var::phi));
        s.kcl_voltage_partial(out.d(Var::v));
        break;
      case DeviceClass::capacitor:
      case DeviceClass::memcapacitor:
        // 0 = q - omega(phi, v)
        s.value(cur, p.q - out.value);
        s.partial(cur, qi, 1.0);
        s.partial(cur, fi, -out.d(Var::phi));
        s.voltage_partial(cur, -out.d(Var::v));
        break;
      case DeviceClass::inductor:
      case DeviceClass::meminductor:
        // 0 = phi - theta(q, i)
        s.value(cur, p.phi - out.value);
        s.partial(cur, fi, 1.0);
        s.partial(cur, qi, -out.d(Var::q));
        s.partial(cur, cur, -out.d(Var::i));
        break;
      case DeviceClass::resistor:
      case DeviceClass::q_memristor:
      case DeviceClass::hybrid_m:
        // 0 = psi(q, phi, i) - v
        s.value(cur, out.value - p.v);
        s.partial(cur, qi, out.d(Var::q));
        s.partial(cur, fi, out.d(Var::phi));
        s.partial(cur, cur, out.d(Var::i));
        s.voltage_partial(cur, -1.0);
        break;
      case DeviceClass::hybrid_w:
        // 0 = i - xi(q, phi, v)
        s.value(cur, p.i - out.value);
        s.partial(cur, cur, 1.0);
        s.partial(cur, qi, -out.d(Var::q));
        s.partial(cur, fi, -out.d(Var::phi));
        s.voltage_partial(cur, -out.d(Var::v));
        break;
      default: break;
    }
    if (cur >= 0) {
      s.kcl(p.i);
      s.kcl_partial(cur, 1.0);
    }
  }

  for (int k = 0; k < size(); ++k) {
    if (!std::isfinite(f(k))) throw DomainError("non-finite value in row " + row_labels_[sz(k)]);
    if (jac && !jac->row(k).allFinite()) throw DomainError("non-finite derivative in row " + row_labels_[sz(k)]);
  }
}

Eigen::VectorXd SemiExplicitDAE::residual(const Eigen::VectorXd& z, double t) const {
  Eigen::VectorXd f;
  evaluate(z, t, f, nullptr);
  return f;
}

JacobianBlocks SemiExplicitDAE::jacobian(const Eigen::VectorXd& z, double t) const {
  Eigen::VectorXd f;
  JacobianBlocks out;
  evaluate(z, t, f, &out.F);
  const int nx = dynamic_size();
  const int ny = size() - nx;
  out.F12 = out.F.topRightCorner(nx, ny);
  out.F21 = out.F.bottomLeftCorner(ny, nx);
  out.F22 = out.F.bottomRightCorner(ny, ny);
  return out;
}

Eigen::VectorXd SemiExplicitDAE::initial_dynamic_state() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dynamic_size());
  for (const InitialCondition& ic : circuit_->initial_conditions()) {
    auto k = layout_.index_of(ic.variable);
    if (!k || *k >= dynamic_size()) throw CircuitError("initial condition on unknown state " + ic.variable);
    x(*k) = ic.value;
  }
  return x;
}

std::string dump_blocks(const SemiExplicitDAE& dae, const JacobianBlocks& blocks) {
  const int nx = dae.dynamic_size();
  const auto& cols = dae.layout().labels();
  const auto& rows = dae.row_labels();
  std::ostringstream out;
  char buf[32];
  auto block = [&](const char* name, const Eigen::MatrixXd& m, int row0, int col0) {
    out << "block " << name << ' ' << m.rows() << ' ' << m.cols() << "\ncols";
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ' ' << cols[sz(col0 + static_cast<int>(c))];
    out << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      out << "row " << rows[sz(row0 + static_cast<int>(r))];
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        double x = m(r, c) == 0.0 ? 0.0 : m(r, c);  // no "-0"
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out << ' ' << buf;
      }
      out << '\n';
    }
    out << "end\n";
  };
  block("F12", blocks.F12, 0, nx);
  block("F21", blocks.F21, nx, 0);
  block("F22", blocks.F22, nx, nx);
  return out.str();
}

}  // namespace memkit
