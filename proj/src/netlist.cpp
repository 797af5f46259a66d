#include "memkit/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <set>
#include <stdexcept>

#include "memkit/error.hpp"

namespace memkit {

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
    x = parent[static_cast<std::size_t>(x)];
  }
  return x;
}

}  // namespace

Circuit::Circuit(std::vector<std::string> nodes, std::string reference, std::vector<Branch> branches,
                 std::vector<InitialCondition> initial_conditions)
    : nodes_(std::move(nodes)), branches_(std::move(branches)), initial_conditions_(std::move(initial_conditions)) {
  if (branches_.empty()) throw CircuitError("circuit has no branches");
  auto ref = std::find(nodes_.begin(), nodes_.end(), reference);
  if (ref == nodes_.end())
    throw CircuitError("reference node '" + reference + "' does not appear in the circuit");
  reference_ = static_cast<int>(ref - nodes_.begin());

  const int n = node_count();
  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::set<std::string, std::less<>> names;
  for (const Branch& b : branches_) {
    if (b.from < 0 || b.from >= n || b.to < 0 || b.to >= n)
      throw CircuitError("branch " + b.device.name + " references an unknown node");
    if (b.from == b.to) throw CircuitError("branch " + b.device.name + " is a self loop");
    if (!names.insert(b.device.name).second) throw CircuitError("duplicate device name " + b.device.name);
    ++degree[static_cast<std::size_t>(b.from)];
    ++degree[static_cast<std::size_t>(b.to)];
    parent[static_cast<std::size_t>(find_root(parent, b.from))] = find_root(parent, b.to);
  }
  for (int k = 0; k < n; ++k) {
    if (degree[static_cast<std::size_t>(k)] == 0)
      throw CircuitError("node '" + nodes_[static_cast<std::size_t>(k)] + "' has no branches");
    if (find_root(parent, k) != find_root(parent, reference_))
      throw CircuitError("circuit is not connected: node '" + nodes_[static_cast<std::size_t>(k)] +
                         "' cannot reach reference node '" + reference_label() + "'");
  }

  rows_.assign(static_cast<std::size_t>(n), -1);
  int row = 0;
  for (int k = 0; k < n; ++k)
    if (k != reference_) rows_[static_cast<std::size_t>(k)] = row++;
}

std::optional<int> Circuit::find_branch(std::string_view name) const {
  for (std::size_t k = 0; k < branches_.size(); ++k)
    if (branches_[k].device.name == name) return static_cast<int>(k);
  return std::nullopt;
}

std::vector<std::string> Circuit::row_labels() const {
  std::vector<std::string> out;
  for (int k = 0; k < node_count(); ++k)
    if (k != reference_) out.push_back(nodes_[static_cast<std::size_t>(k)]);
  return out;
}

Eigen::MatrixXd IncidenceMatrix::columns(std::initializer_list<DeviceClass> classes) const {
  std::vector<int> cols;
  for (DeviceClass cls : classes) {
    auto it = column_partition.find(cls);
    if (it != column_partition.end()) cols.insert(cols.end(), it->second.begin(), it->second.end());
  }
  std::sort(cols.begin(), cols.end());
  Eigen::MatrixXd out(matrix.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = matrix.col(cols[k]).cast<double>();
  return out;
}

IncidenceMatrix reduced_incidence(const Circuit& circuit) {
  IncidenceMatrix inc;
  inc.matrix = Eigen::MatrixXi::Zero(circuit.node_count() - 1, circuit.branch_count());
  for (DeviceClass cls : kAllDeviceClasses) inc.column_partition[cls];
  for (int j = 0; j < circuit.branch_count(); ++j) {
    const Branch& b = circuit.branches()[static_cast<std::size_t>(j)];
    if (int r = circuit.row_of(b.from); r >= 0) inc.matrix(r, j) = 1;
    if (int r = circuit.row_of(b.to); r >= 0) inc.matrix(r, j) = -1;
    inc.column_partition[b.device.cls].push_back(j);
  }
  return inc;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Token {
  std::string_view text;
  int column = 0;  // 1-based
};

bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct PrefixEntry {
  std::string_view prefix;
  std::optional<DeviceClass> cls;
  std::string_view unsupported;  // set for second-order devices
};

// Longest prefixes first.
constexpr PrefixEntry kPrefixes[] = {
    {"QMC", std::nullopt, "charge-controlled memcapacitor"},
    {"FML", std::nullopt, "flux-controlled meminductor"},
    {"SR", std::nullopt, "sigma-rho device"},
    {"MQ", DeviceClass::q_memristor, ""},
    {"MW", DeviceClass::phi_memristor, ""},
    {"MC", DeviceClass::memcapacitor, ""},
    {"ML", DeviceClass::meminductor, ""},
    {"HM", DeviceClass::hybrid_m, ""},
    {"HW", DeviceClass::hybrid_w, ""},
    {"R", DeviceClass::resistor, ""},
    {"G", DeviceClass::conductor, ""},
    {"C", DeviceClass::capacitor, ""},
    {"L", DeviceClass::inductor, ""},
    {"V", DeviceClass::voltage_source, ""},
    {"I", DeviceClass::current_source, ""},
};

class NetlistParser {
 public:
  explicit NetlistParser(std::string_view text) : text_(text) {}

  Circuit parse() {
    std::size_t pos = 0;
    int line_no = 0;
    while (pos <= text_.size()) {
      std::size_t end = text_.find('\n', pos);
      if (end == std::string_view::npos) end = text_.size();
      ++line_no;
      std::string_view line = text_.substr(pos, end - pos);
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      line_ = line;
      line_no_ = line_no;
      parse_line();
      if (ended_ || end == text_.size()) break;
      pos = end + 1;
    }
    check_initial_conditions();
    try {
      return Circuit(nodes_, reference_.value_or("0"), std::move(branches_), std::move(ics_));
    } catch (const CircuitError& e) {
      if (!reference_ && std::find(nodes_.begin(), nodes_.end(), "0") == nodes_.end() && !nodes_.empty())
        throw CircuitError("no reference node: use node 0 or add a '.ref <node>' directive");
      throw;
    }
  }

 private:
  [[noreturn]] void fail(const std::string& message, int column) const { throw ParseError(message, line_no_, column); }
  [[noreturn]] void fail(const std::string& message, const Token& at) const { fail(message, at.column); }

  int column_of(std::string_view part) const { return static_cast<int>(part.data() - line_.data()) + 1; }

  std::vector<Token> tokenize(std::string_view s) const {
    std::vector<Token> out;
    std::size_t k = 0;
    while (k < s.size()) {
      while (k < s.size() && std::isspace(static_cast<unsigned char>(s[k]))) ++k;
      if (k >= s.size()) break;
      std::size_t start = k;
      while (k < s.size() && !std::isspace(static_cast<unsigned char>(s[k]))) ++k;
      out.push_back({s.substr(start, k - start), column_of(s.substr(start))});
    }
    return out;
  }

  // Text after the first `count` tokens, trimmed.
  std::string_view rest_after(const Token& last) const {
    std::size_t start = static_cast<std::size_t>(last.column - 1) + last.text.size();
    std::string_view rest = line_.substr(std::min(start, line_.size()));
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.back()))) rest.remove_suffix(1);
    return rest;
  }

  void check_name(const Token& t, const char* what) const {
    if (t.text.empty() || !std::all_of(t.text.begin(), t.text.end(), is_name_char))
      fail(std::string("invalid ") + what + " '" + std::string(t.text) + "' (letters, digits and '_' only)", t);
  }

  Expr parse_expression(std::string_view text) const {
    try {
      return parse_expr(text, params_);
    } catch (const ParseError& e) {
      fail(e.message(), column_of(text) + e.column() - 1);
    }
  }

  double parse_constant(std::string_view text) const {
    Expr e = parse_expression(text);
    if (!e.variables().empty()) fail("expected a constant, found '" + std::string(text) + "'", column_of(text));
    try {
      return e.eval(Point{});
    } catch (const DomainError& err) {
      fail(err.what(), column_of(text));
    }
  }

  int node_index(const Token& t) {
    check_name(t, "node name");
    auto it = std::find(nodes_.begin(), nodes_.end(), t.text);
    if (it != nodes_.end()) return static_cast<int>(it - nodes_.begin());
    nodes_.emplace_back(t.text);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void parse_line() {
    std::vector<Token> toks = tokenize(line_);
    if (toks.empty()) return;
    if (toks[0].text.front() == '.') {
      parse_directive(toks);
      return;
    }
    parse_device(toks);
  }

  void parse_directive(const std::vector<Token>& toks) {
    std::string name = lower(toks[0].text);
    if (name == ".ref") {
      if (toks.size() != 2) fail(".ref expects exactly one node", toks[0]);
      if (reference_) fail("duplicate .ref directive", toks[0]);
      check_name(toks[1], "node name");
      reference_ = std::string(toks[1].text);
    } else if (name == ".ic") {
      if (toks.size() != 3) fail(".ic expects a variable and a value", toks[0]);
      ics_.push_back({std::string(toks[1].text), parse_constant(toks[2].text)});
      ic_lines_.push_back({line_no_, toks[1].column});
    } else if (name == ".param") {
      if (toks.size() < 3) fail(".param expects a name and a value", toks[0]);
      check_name(toks[1], "parameter name");
      params_[std::string(toks[1].text)] = parse_constant(rest_after(toks[1]));
    } else if (name == ".end") {
      ended_ = true;  // rest of the text is ignored
    } else {
      fail("unknown directive '" + std::string(toks[0].text) + "'", toks[0]);
    }
  }

  void parse_device(const std::vector<Token>& toks) {
    const Token& name = toks[0];
    check_name(name, "device name");
    std::string up = upper(name.text);
    const PrefixEntry* entry = nullptr;
    for (const PrefixEntry& p : kPrefixes) {
      if (up.starts_with(p.prefix)) {
        entry = &p;
        break;
      }
    }
    if (entry == nullptr) fail("unknown device class '" + std::string(name.text) + "'", name);
    if (!entry->cls)
      fail("second-order devices are out of scope (" + std::string(entry->unsupported) + " '" +
               std::string(name.text) + "')",
           name);
    for (const Branch& b : branches_)
      if (b.device.name == name.text) fail("duplicate device name '" + std::string(name.text) + "'", name);
    if (toks.size() < 4) fail("expected: name n+ n- <value>", toks.back());

    Branch branch;
    branch.line = line_no_;
    branch.from = node_index(toks[1]);
    branch.to = node_index(toks[2]);
    if (branch.from == branch.to) fail("self-loop branch: both terminals are node '" + std::string(toks[1].text) + "'", toks[2]);

    DeviceClass cls = *entry->cls;
    std::string dev_name(name.text);
    std::string_view rest = rest_after(toks[2]);
    switch (cls) {
      case DeviceClass::resistor:
      case DeviceClass::conductor:
      case DeviceClass::capacitor:
      case DeviceClass::inductor: branch.device = parse_linear(dev_name, cls, rest); break;
      case DeviceClass::voltage_source:
      case DeviceClass::current_source: branch.device = parse_source(dev_name, cls, rest); break;
      default: branch.device = parse_mem(dev_name, cls, rest); break;
    }
    branches_.push_back(std::move(branch));
  }

  DeviceSpec expression_device(const std::string& name, DeviceClass cls, std::string_view text) const {
    if (text.empty()) fail("expected an expression after 'expr'", static_cast<int>(line_.size()) + 1);
    Expr e = parse_expression(text);
    VarSet reads = e.variables();
    if (!reads.subset_of(legal_inputs(cls))) {
      fail("arity violation: a " + std::string(device_class_name(cls)) + " characteristic may read " +
               legal_inputs(cls).to_string() + ", found " + reads.to_string(),
           column_of(text));
    }
    DeviceSpec d;
    d.name = name;
    d.cls = cls;
    d.characteristic = Characteristic::expression(output_variable(cls), std::move(e));
    return d;
  }

  static bool starts_with_word(std::string_view rest, std::string_view word) {
    if (rest.size() < word.size() || lower(rest.substr(0, word.size())) != word) return false;
    return rest.size() == word.size() || std::isspace(static_cast<unsigned char>(rest[word.size()]));
  }

  static std::string_view after_word(std::string_view rest, std::size_t n) {
    rest.remove_prefix(n);
    while (!rest.empty() && std::isspace(static_cast<unsigned char>(rest.front()))) rest.remove_prefix(1);
    return rest;
  }

  DeviceSpec parse_linear(const std::string& name, DeviceClass cls, std::string_view rest) const {
    if (starts_with_word(rest, "expr")) return expression_device(name, cls, after_word(rest, 4));
    std::string keyword = lower(device_prefix(cls));
    if (starts_with_word(rest, keyword)) rest = after_word(rest, keyword.size());
    if (rest.empty()) fail("expected a value", static_cast<int>(line_.size()) + 1);
    double value = parse_constant(rest);
    Affine form;
    form.coeff[static_cast<std::size_t>(incremental_variable(cls))] = value;
    DeviceSpec d;
    d.name = name;
    d.cls = cls;
    d.characteristic = Characteristic::affine(output_variable(cls), form);
    return d;
  }

  DeviceSpec parse_source(const std::string& name, DeviceClass cls, std::string_view rest) const {
    std::vector<Token> args = tokenize(rest);
    DeviceSpec d;
    d.name = name;
    d.cls = cls;
    std::string kind = lower(args[0].text);
    if (kind == "dc") {
      if (args.size() != 2) fail("dc source expects one value", args[0]);
      d.source = SourceWaveform::dc(parse_constant(args[1].text));
    } else if (kind == "sine") {
      if (args.size() < 3 || args.size() > 5) fail("sine source expects: amp freq [phase] [offset]", args[0]);
      double v[4] = {0, 0, 0, 0};
      for (std::size_t k = 1; k < args.size(); ++k) v[k - 1] = parse_constant(args[k].text);
      d.source = SourceWaveform::sine(v[0], v[1], v[2], v[3]);
    } else {
      if (args.size() != 1) fail("expected 'dc <value>' or 'sine amp freq [phase] [offset]'", args[0]);
      d.source = SourceWaveform::dc(parse_constant(args[0].text));
    }
    return d;
  }

  DeviceSpec parse_mem(const std::string& name, DeviceClass cls, std::string_view rest) const {
    if (starts_with_word(rest, "expr")) return expression_device(name, cls, after_word(rest, 4));

    std::size_t k = 0;
    while (k < rest.size() && is_name_char(rest[k])) ++k;
    std::string builtin(rest.substr(0, k));
    std::string_view tail = rest.substr(k);
    while (!tail.empty() && std::isspace(static_cast<unsigned char>(tail.front()))) tail.remove_prefix(1);
    std::vector<double> args;
    if (!tail.empty()) {
      if (tail.front() != '(' || tail.back() != ')')
        fail("expected '(' arguments ')' after builtin '" + builtin + "'", column_of(tail));
      std::string_view inner = tail.substr(1, tail.size() - 2);
      int depth = 0;
      std::size_t start = 0;
      for (std::size_t p = 0; p <= inner.size(); ++p) {
        if (p == inner.size() || (inner[p] == ',' && depth == 0)) {
          std::string_view arg = inner.substr(start, p - start);
          while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.front()))) arg.remove_prefix(1);
          while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.back()))) arg.remove_suffix(1);
          if (arg.empty()) {
            if (p == inner.size() && args.empty() && start == 0) break;
            fail("empty builtin argument", column_of(inner) + static_cast<int>(p));
          }
          args.push_back(parse_constant(arg));
          start = p + 1;
        } else if (inner[p] == '(') {
          ++depth;
        } else if (inner[p] == ')') {
          --depth;
        }
      }
    }

    auto expect = [&](DeviceClass wanted, std::size_t nargs) {
      if (cls != wanted)
        fail("builtin '" + builtin + "' defines a " + std::string(device_class_name(wanted)) + ", but " + name +
                 " is a " + std::string(device_class_name(cls)),
             column_of(rest));
      if (args.size() != nargs)
        fail("builtin '" + builtin + "' expects " + std::to_string(nargs) + " arguments, got " +
                 std::to_string(args.size()),
             column_of(rest));
    };

    if (builtin == "chua_m") {
      expect(DeviceClass::q_memristor, 0);
      return chua_q_memristor(name);
    }
    if (builtin == "chua_w") {
      expect(DeviceClass::phi_memristor, 0);
      return chua_phi_memristor(name);
    }
    if (builtin == "josephson_mc") {
      expect(DeviceClass::memcapacitor, 4);
      try {
        return josephson_memcapacitor(name, args[0], args[1], args[2], args[3]);
      } catch (const std::invalid_argument& e) {
        fail(e.what(), column_of(rest));
      }
    }
    if (builtin == "hybrid_series") {
      expect(DeviceClass::hybrid_m, 0);
      DeviceSpec d = chua_series_hybrid(name, default_flux_map(), default_charge_map().derivative(Var::phi));
      d.builtin = "hybrid_series";
      return d;
    }
    if (builtin == "hybrid_parallel") {
      expect(DeviceClass::hybrid_w, 0);
      DeviceSpec d = chua_parallel_hybrid(name, default_charge_map(), default_flux_map().derivative(Var::q));
      d.builtin = "hybrid_parallel";
      return d;
    }
    if (builtin.empty()) fail("expected a builtin name or 'expr <expression>'", column_of(rest));
    fail("unknown builtin '" + builtin + "'", column_of(rest));
  }

  void check_initial_conditions() {
    std::set<std::string, std::less<>> seen;
    for (std::size_t k = 0; k < ics_.size(); ++k) {
      const std::string& label = ics_[k].variable;
      line_no_ = ic_lines_[k].first;
      int col = ic_lines_[k].second;
      std::optional<Var> var;
      std::string device;
      auto open = label.find('(');
      if (open != std::string::npos && label.back() == ')') {
        std::string head = label.substr(0, open);
        device = label.substr(open + 1, label.size() - open - 2);
        if (head == "q") var = Var::q;
        if (head == "phi") var = Var::phi;
      }
      if (!var) fail("initial conditions name a dynamic variable as q(<device>) or phi(<device>)", col);
      auto it = std::find_if(branches_.begin(), branches_.end(), [&](const Branch& b) { return b.device.name == device; });
      if (it == branches_.end()) fail("unknown device '" + device + "' in .ic", col);
      if (!dynamic_variables(it->device.cls).contains(*var))
        fail(label + " is not a dynamic variable of " + std::string(device_class_name(it->device.cls)) + " " + device,
             col);
      if (!seen.insert(label).second) fail("duplicate initial condition for " + label, col);
    }
  }

  std::string_view text_;
  std::string_view line_;
  int line_no_ = 0;
  std::vector<std::string> nodes_;
  std::optional<std::string> reference_;
  std::vector<Branch> branches_;
  std::vector<InitialCondition> ics_;
  std::vector<std::pair<int, int>> ic_lines_;
  ConstantTable params_;
  bool ended_ = false;
};

std::string device_text(const DeviceSpec& d) {
  if (d.source) {
    const SourceWaveform& w = *d.source;
    if (w.kind == SourceWaveform::Kind::dc) return "dc " + format_number(w.value);
    return "sine " + format_number(w.amplitude) + " " + format_number(w.frequency) + " " + format_number(w.phase) +
           " " + format_number(w.offset);
  }
  if (!d.builtin.empty()) return d.builtin;
  const Characteristic& ch = *d.characteristic;
  if (const Affine* a = ch.affine_form()) {
    auto port = static_cast<std::size_t>(incremental_variable(d.cls));
    bool single = a->offset == 0.0;
    for (std::size_t k = 0; k < 4; ++k)
      if (k != port && a->coeff[k] != 0.0) single = false;
    if (single) return format_number(a->coeff[port]);
  }
  return "expr " + ch.as_expr().to_string();
}

}  // namespace

Circuit parse_netlist(std::string_view text) { return NetlistParser(text).parse(); }

std::string to_netlist(const Circuit& circuit) {
  std::string out = ".ref " + circuit.reference_label() + "\n";
  for (const Branch& b : circuit.branches()) {
    out += b.device.name + " " + circuit.nodes()[static_cast<std::size_t>(b.from)] + " " +
           circuit.nodes()[static_cast<std::size_t>(b.to)] + " " + device_text(b.device) + "\n";
  }
  for (const InitialCondition& ic : circuit.initial_conditions())
    out += ".ic " + ic.variable + " " + format_number(ic.value) + "\n";
  return out;
}

}  // namespace memkit
