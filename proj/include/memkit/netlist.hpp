#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "memkit/devices.hpp"

namespace memkit {

// A device placed between two nodes. The branch leaves `from` (the "+" node)
// and enters `to`.
struct Branch {
  DeviceSpec device;
  int from = 0;
  int to = 0;
  int line = 0;  // netlist line, 0 when built programmatically
};

struct InitialCondition {
  std::string variable;  // layout label, e.g. "q(C1)" or "phi(L1)"
  double value = 0.0;
};

// Connected circuit graph with a designated reference node. Immutable after
// construction; the constructor enforces the structural invariants and throws
// CircuitError when they fail.
class Circuit {
 public:
  Circuit(std::vector<std::string> nodes, std::string reference, std::vector<Branch> branches,
          std::vector<InitialCondition> initial_conditions = {});

  const std::vector<std::string>& nodes() const { return nodes_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int reference() const { return reference_; }
  const std::string& reference_label() const { return nodes_[static_cast<std::size_t>(reference_)]; }

  const std::vector<Branch>& branches() const { return branches_; }
  int branch_count() const { return static_cast<int>(branches_.size()); }
  std::optional<int> find_branch(std::string_view name) const;

  const std::vector<InitialCondition>& initial_conditions() const { return initial_conditions_; }

  // Row of node `node` in the reduced incidence matrix, -1 for the reference.
  int row_of(int node) const { return rows_[static_cast<std::size_t>(node)]; }
  // Labels of the non-reference nodes in row order.
  std::vector<std::string> row_labels() const;

 private:
  std::vector<std::string> nodes_;
  int reference_ = 0;
  std::vector<Branch> branches_;
  std::vector<InitialCondition> initial_conditions_;
  std::vector<int> rows_;
};

// Reduced incidence matrix A with its columns grouped by device class.
struct IncidenceMatrix {
  Eigen::MatrixXi matrix;  // (n-1) x b, entries in {-1, 0, 1}
  std::map<DeviceClass, std::vector<int>> column_partition;

  // Columns of the given classes, in branch order, as a real matrix.
  Eigen::MatrixXd columns(std::initializer_list<DeviceClass> classes) const;
};

IncidenceMatrix reduced_incidence(const Circuit& circuit);

// Parses the netlist text format:
//
//   # comment
//   R|G|C|L<name> n+ n- [r|g|c|l] value          linear element
//   R|G|C|L<name> n+ n- expr <expression>          nonlinear element
//   V|I<name> n+ n- dc v0 | sine amp freq [phase] [offset]
//   MQ|MW|MC|ML|HM|HW<name> n+ n- builtin[(args)] | expr <expression>
//   .ref node     .ic q(C1) 0.5     .param k 2
//
// The device class is taken from the name prefix. Throws ParseError with the
// line and column of the offending token, or CircuitError for graph-level
// problems (disconnected circuit).
Circuit parse_netlist(std::string_view text);

// Canonical netlist text; parse_netlist(to_netlist(c)) prints back identically.
std::string to_netlist(const Circuit& circuit);

}  // namespace memkit
