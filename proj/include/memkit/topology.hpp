#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memkit/netlist.hpp"

namespace memkit {

// A set of branches, by index in declaration order (sorted ascending).
struct Witness {
  std::vector<int> branches;

  bool operator==(const Witness&) const = default;
};

// Branch names of a witness, "{V1, C1}".
std::string witness_names(const Circuit& circuit, const Witness& witness);

struct WellPosedness {
  enum class Kind { ok, v_loop, i_cutset };
  Kind kind = Kind::ok;
  Witness witness;

  bool ok() const { return kind == Kind::ok; }
};

struct DegeneracyReport {
  WellPosedness well_posed;
  std::optional<Witness> vcm_loop;    // loop of V sources, capacitors, memcapacitors
  std::optional<Witness> ilm_cutset;  // cutset of I sources, inductors, meminductors
  bool nondegenerate = true;
};

// Loops made of voltage sources only, or cutsets made of current sources only.
WellPosedness check_wellposed(const Circuit& circuit);

// First cycle (in declaration order) of the subgraph of V, C and MC branches.
std::optional<Witness> vcm_loop_exists(const Circuit& circuit);

// Set of I, L and ML branches whose removal disconnects the circuit, if any.
std::optional<Witness> ilm_cutset_exists(const Circuit& circuit);

DegeneracyReport degeneracy_report(const Circuit& circuit);

// Graph-built kernel bases used by the structural projectors of the index-two
// reduction.
//
// Columns span ker(A_c A_mc A_u): one signed fundamental-loop vector of the
// V/C/MC subgraph per chord, indexed over the V/C/MC branches in declaration
// order.
Eigen::MatrixXd vcm_loop_basis(const Circuit& circuit);
// Columns span ker(A_nonILM^T): one indicator vector over the non-reference
// nodes for each component (not containing the reference) left after deleting
// the I, L and ML branches.
Eigen::MatrixXd ilm_cut_basis(const Circuit& circuit);

}  // namespace memkit
