#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "memkit/netlist.hpp"

namespace memkit {

// Dynamic variable blocks in state-vector order.
enum class DynamicBlock { q_c, q_mc, phi_l, phi_ml, q_m, q_ml, q_hm, q_hw, phi_w, phi_mc, phi_hm, phi_hw };
// Algebraic variable blocks, following the dynamic ones.
enum class AlgebraicBlock { e, i_c, i_mc, i_u, i_l, i_ml, i_r, i_m, i_hm, i_hw };

struct BlockRange {
  int offset = 0;  // index into the full variable vector z
  int size = 0;
};

// Position of every variable of the nodal model inside z = (x, y). Within a
// block, variables follow branch declaration order; node potentials follow
// the row order of the reduced incidence matrix.
class VariableLayout {
 public:
  explicit VariableLayout(const Circuit& circuit);

  int dynamic_size() const { return dynamic_size_; }
  int algebraic_size() const { return size() - dynamic_size_; }
  int size() const { return static_cast<int>(labels_.size()); }

  BlockRange block(DynamicBlock b) const { return dynamic_[static_cast<std::size_t>(b)]; }
  BlockRange block(AlgebraicBlock b) const { return algebraic_[static_cast<std::size_t>(b)]; }

  // "q(C1)", "phi(L1)", "e(1)", "i(V1)".
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<int> index_of(std::string_view label) const;

  // Index in z of a branch's current, charge or flux; -1 when the variable
  // is not part of the model (eliminated currents of G and MW branches,
  // source currents of I branches, non-dynamic charges and fluxes).
  int current_index(int branch) const { return current_[static_cast<std::size_t>(branch)]; }
  int charge_index(int branch) const { return charge_[static_cast<std::size_t>(branch)]; }
  int flux_index(int branch) const { return flux_[static_cast<std::size_t>(branch)]; }
  // Index in z of the potential of node row `row` (row of A).
  int potential_index(int row) const { return block(AlgebraicBlock::e).offset + row; }

 private:
  int dynamic_size_ = 0;
  std::vector<BlockRange> dynamic_;
  std::vector<BlockRange> algebraic_;
  std::vector<std::string> labels_;
  std::vector<int> current_, charge_, flux_;
};

// Partial derivatives of the right-hand side f of E z' = f(z, t).
// F = [[0, F12], [F21, F22]] with the dynamic variables first.
struct JacobianBlocks {
  Eigen::MatrixXd F;
  Eigen::MatrixXd F12;
  Eigen::MatrixXd F21;
  Eigen::MatrixXd F22;
};

// Semiexplicit nodal model x' = f(x, y, t), 0 = g(x, y, t) of a first-order
// circuit. Rows of f follow the variable layout: the dynamic rows define x',
// then come Kirchhoff's current law at every non-reference node and one
// constitutive row per branch that carries a current variable. Immutable and
// safe to evaluate concurrently.
class SemiExplicitDAE {
 public:
  explicit SemiExplicitDAE(Circuit circuit);

  const Circuit& circuit() const { return *circuit_; }
  const IncidenceMatrix& incidence() const { return incidence_; }
  const VariableLayout& layout() const { return layout_; }

  int size() const { return layout_.size(); }
  int dynamic_size() const { return layout_.dynamic_size(); }

  // block-diag{I, 0}
  Eigen::MatrixXd E() const;

  // Stacked right-hand side: f for the dynamic rows, g for the algebraic
  // rows. Throws DomainError naming the row on a non-finite value.
  Eigen::VectorXd residual(const Eigen::VectorXd& z, double t) const;
  JacobianBlocks jacobian(const Eigen::VectorXd& z, double t) const;
  // Both at once; `jac` may be null.
  void evaluate(const Eigen::VectorXd& z, double t, Eigen::VectorXd& f, Eigen::MatrixXd* jac) const;

  // "q(C1)'" for dynamic rows, "kcl(1)" for Kirchhoff rows and the branch
  // name for constitutive rows.
  const std::vector<std::string>& row_labels() const { return row_labels_; }

  // Dynamic state from the netlist's .ic directives (zero elsewhere).
  Eigen::VectorXd initial_dynamic_state() const;

  // Branch voltage A^T e for branch `branch` at z.
  double branch_voltage(const Eigen::VectorXd& z, int branch) const;
  // Branch current at (z, t), whether it is a model variable or eliminated.
  double branch_current(const Eigen::VectorXd& z, double t, int branch) const;
  // Port variables (q, phi, i, v, t) seen by the characteristic of `branch`.
  Point branch_point(const Eigen::VectorXd& z, double t, int branch) const;

 private:
  std::shared_ptr<const Circuit> circuit_;
  IncidenceMatrix incidence_;
  VariableLayout layout_;
  std::vector<std::string> row_labels_;
};

SemiExplicitDAE assemble(const Circuit& circuit);

// Plain-text labeled dump of F12, F21 and F22:
//
//   block F22 2 2
//   cols e(1) i(C1)
//   row kcl(1) 2 1
//   row C1 -1 0
//   end
std::string dump_blocks(const SemiExplicitDAE& dae, const JacobianBlocks& blocks);

}  // namespace memkit
