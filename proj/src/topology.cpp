#include "memkit/topology.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

namespace memkit {

namespace {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[idx(x)] != x) {
      parent_[idx(x)] = parent_[idx(parent_[idx(x)])];
      x = parent_[idx(x)];
    }
    return x;
  }

  // False when a and b were already joined.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[idx(a)] = b;
    return true;
  }

 private:
  static std::size_t idx(int x) { return static_cast<std::size_t>(x); }
  std::vector<int> parent_;
};

using BranchFilter = std::function<bool(DeviceClass)>;

bool is_vcm(DeviceClass c) {
  return c == DeviceClass::voltage_source || c == DeviceClass::capacitor || c == DeviceClass::memcapacitor;
}

bool is_ilm(DeviceClass c) {
  return c == DeviceClass::current_source || c == DeviceClass::inductor || c == DeviceClass::meminductor;
}

struct ForestEdge {
  int to;
  int branch;
};

// Path of tree branches from `start` to `goal`, with +1 when the branch is
// traversed in its own orientation.
std::vector<std::pair<int, int>> forest_path(const Circuit& circuit, const std::vector<std::vector<ForestEdge>>& adj,
                                             int start, int goal) {
  std::vector<int> via(adj.size(), -1);
  std::vector<int> prev(adj.size(), -1);
  std::vector<bool> seen(adj.size(), false);
  std::deque<int> queue{start};
  seen[static_cast<std::size_t>(start)] = true;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (u == goal) break;
    for (const ForestEdge& e : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(e.to)]) continue;
      seen[static_cast<std::size_t>(e.to)] = true;
      via[static_cast<std::size_t>(e.to)] = e.branch;
      prev[static_cast<std::size_t>(e.to)] = u;
      queue.push_back(e.to);
    }
  }
  std::vector<std::pair<int, int>> path;
  for (int u = goal; u != start; u = prev[static_cast<std::size_t>(u)]) {
    int b = via[static_cast<std::size_t>(u)];
    int sign = circuit.branches()[static_cast<std::size_t>(b)].to == u ? 1 : -1;
    path.emplace_back(b, sign);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

// Signed fundamental loops of the subgraph selected by `keep`, one per chord,
// in declaration order of the chords. Each loop lists (branch, sign).
std::vector<std::vector<std::pair<int, int>>> fundamental_loops(const Circuit& circuit, const BranchFilter& keep,
                                                                bool first_only) {
  UnionFind uf(circuit.node_count());
  std::vector<std::vector<ForestEdge>> adj(static_cast<std::size_t>(circuit.node_count()));
  std::vector<std::vector<std::pair<int, int>>> loops;
  for (int j = 0; j < circuit.branch_count(); ++j) {
    const Branch& b = circuit.branches()[static_cast<std::size_t>(j)];
    if (!keep(b.device.cls)) continue;
    if (uf.unite(b.from, b.to)) {
      adj[static_cast<std::size_t>(b.from)].push_back({b.to, j});
      adj[static_cast<std::size_t>(b.to)].push_back({b.from, j});
      continue;
    }
    // Chord from -> to, closed by the tree path to -> from.
    std::vector<std::pair<int, int>> loop{{j, 1}};
    for (const auto& step : forest_path(circuit, adj, b.to, b.from)) loop.push_back(step);
    loops.push_back(std::move(loop));
    if (first_only) break;
  }
  return loops;
}

std::optional<Witness> first_loop(const Circuit& circuit, const BranchFilter& keep) {
  auto loops = fundamental_loops(circuit, keep, true);
  if (loops.empty()) return std::nullopt;
  Witness w;
  for (const auto& [branch, sign] : loops.front()) w.branches.push_back(branch);
  std::sort(w.branches.begin(), w.branches.end());
  return w;
}

// Component id per node after deleting the branches selected by `removed`.
std::vector<int> components_without(const Circuit& circuit, const BranchFilter& removed, int& count) {
  UnionFind uf(circuit.node_count());
  for (const Branch& b : circuit.branches())
    if (!removed(b.device.cls)) uf.unite(b.from, b.to);
  std::vector<int> root_to_id(static_cast<std::size_t>(circuit.node_count()), -1);
  std::vector<int> comp(static_cast<std::size_t>(circuit.node_count()));
  count = 0;
  for (int k = 0; k < circuit.node_count(); ++k) {
    int r = uf.find(k);
    if (root_to_id[static_cast<std::size_t>(r)] < 0) root_to_id[static_cast<std::size_t>(r)] = count++;
    comp[static_cast<std::size_t>(k)] = root_to_id[static_cast<std::size_t>(r)];
  }
  return comp;
}

std::optional<Witness> first_cutset(const Circuit& circuit, const BranchFilter& removed) {
  int count = 0;
  std::vector<int> comp = components_without(circuit, removed, count);
  if (count <= 1) return std::nullopt;

  auto side = [&](int c) {
    Witness w;
    for (int j = 0; j < circuit.branch_count(); ++j) {
      const Branch& b = circuit.branches()[static_cast<std::size_t>(j)];
      if (!removed(b.device.cls)) continue;
      bool in_from = comp[static_cast<std::size_t>(b.from)] == c;
      bool in_to = comp[static_cast<std::size_t>(b.to)] == c;
      if (in_from != in_to) w.branches.push_back(j);
    }
    return w;
  };

  for (const Branch& b : circuit.branches()) {
    if (!removed(b.device.cls)) continue;
    int ca = comp[static_cast<std::size_t>(b.from)];
    int cb = comp[static_cast<std::size_t>(b.to)];
    if (ca == cb) continue;
    Witness wa = side(ca);
    Witness wb = side(cb);
    return wb.branches.size() < wa.branches.size() ? wb : wa;
  }
  return std::nullopt;  // unreachable for a connected circuit
}

}  // namespace

std::string witness_names(const Circuit& circuit, const Witness& witness) {
  std::string out = "{";
  for (std::size_t k = 0; k < witness.branches.size(); ++k) {
    if (k) out += ", ";
    out += circuit.branches()[static_cast<std::size_t>(witness.branches[k])].device.name;
  }
  return out + "}";
}

WellPosedness check_wellposed(const Circuit& circuit) {
  WellPosedness r;
  auto only_v = [](DeviceClass c) { return c == DeviceClass::voltage_source; };
  auto only_i = [](DeviceClass c) { return c == DeviceClass::current_source; };
  if (auto loop = first_loop(circuit, only_v)) {
    r.kind = WellPosedness::Kind::v_loop;
    r.witness = *loop;
  } else if (auto cut = first_cutset(circuit, only_i)) {
    r.kind = WellPosedness::Kind::i_cutset;
    r.witness = *cut;
  }
  return r;
}

std::optional<Witness> vcm_loop_exists(const Circuit& circuit) { return first_loop(circuit, is_vcm); }

std::optional<Witness> ilm_cutset_exists(const Circuit& circuit) { return first_cutset(circuit, is_ilm); }

DegeneracyReport degeneracy_report(const Circuit& circuit) {
  DegeneracyReport r;
  r.well_posed = check_wellposed(circuit);
  r.vcm_loop = vcm_loop_exists(circuit);
  r.ilm_cutset = ilm_cutset_exists(circuit);
  r.nondegenerate = !r.vcm_loop && !r.ilm_cutset;
  return r;
}

Eigen::MatrixXd vcm_loop_basis(const Circuit& circuit) {
  // Position of each V/C/MC branch in the (A_c A_mc A_u) column order.
  std::vector<int> position(static_cast<std::size_t>(circuit.branch_count()), -1);
  int next = 0;
  for (DeviceClass cls : {DeviceClass::capacitor, DeviceClass::memcapacitor, DeviceClass::voltage_source})
    for (int j = 0; j < circuit.branch_count(); ++j)
      if (circuit.branches()[static_cast<std::size_t>(j)].device.cls == cls) position[static_cast<std::size_t>(j)] = next++;

  auto loops = fundamental_loops(circuit, is_vcm, false);
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(next, static_cast<Eigen::Index>(loops.size()));
  for (std::size_t k = 0; k < loops.size(); ++k)
    for (const auto& [branch, sign] : loops[k])
      basis(position[static_cast<std::size_t>(branch)], static_cast<Eigen::Index>(k)) = sign;
  return basis;
}

Eigen::MatrixXd ilm_cut_basis(const Circuit& circuit) {
  int count = 0;
  std::vector<int> comp = components_without(circuit, is_ilm, count);
  int ref_comp = comp[static_cast<std::size_t>(circuit.reference())];
  std::vector<int> column(static_cast<std::size_t>(count), -1);
  int cols = 0;
  for (int k = 0; k < circuit.node_count(); ++k) {
    int c = comp[static_cast<std::size_t>(k)];
    if (c != ref_comp && column[static_cast<std::size_t>(c)] < 0) column[static_cast<std::size_t>(c)] = cols++;
  }
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(circuit.node_count() - 1, cols);
  for (int k = 0; k < circuit.node_count(); ++k) {
    int c = comp[static_cast<std::size_t>(k)];
    if (c != ref_comp) basis(circuit.row_of(k), column[static_cast<std::size_t>(c)]) = 1.0;
  }
  return basis;
}

}  // namespace memkit
