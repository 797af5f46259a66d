#include <doctest.h>

#include "memkit/error.hpp"
#include "memkit/netlist.hpp"
#include "support.hpp"

using namespace memkit;

namespace {

ParseError parse_error(const std::string& text) {
  try {
    parse_netlist(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected ParseError for: " << text);
  return ParseError("", 0, 0);
}

}  // namespace

TEST_CASE("minimal netlist") {
  Circuit c = parse_netlist("V1 1 0 dc 1\nR1 1 0 r 1");
  CHECK(c.node_count() == 2);
  REQUIRE(c.branch_count() == 2);
  CHECK(c.branches()[0].device.cls == DeviceClass::voltage_source);
  CHECK(c.branches()[1].device.cls == DeviceClass::resistor);
  CHECK(c.reference_label() == "0");
}

TEST_CASE("builtin phi-memristor expands to W(phi) = 1 + phi^2") {
  Circuit c = parse_netlist("MW1 1 0 chua_w\nR1 1 0 1");
  const DeviceSpec& d = c.branches()[0].device;
  CHECK(d.cls == DeviceClass::phi_memristor);
  Point p;
  p.phi = 2;
  p.v = 1;
  CHECK(d.characteristic->eval(p) == doctest::Approx(5));
  CHECK(incremental_matrix(d.cls, *d.characteristic, p) == doctest::Approx(5));
}

TEST_CASE("parse errors name line and column") {
  ParseError e = parse_error("R1 1 0 1\nX1 1 0 foo");
  CHECK(e.line() == 2);
  CHECK(e.column() == 1);
  CHECK(std::string(e.what()).find("unknown device class") != std::string::npos);

  e = parse_error("R1 1 0 1\nQMC1 1 0 expr v");
  CHECK(std::string(e.what()).find("second-order devices are out of scope") != std::string::npos);

  e = parse_error("R1 1 0 1\nC1 1 0 expr v + i");
  CHECK(e.line() == 2);
  CHECK(e.column() == 13);
  CHECK(std::string(e.what()).find("arity violation") != std::string::npos);

  e = parse_error("R1 1 1 1");
  CHECK(std::string(e.what()).find("self-loop") != std::string::npos);
  e = parse_error("R1 1 0 1\nR1 1 0 2");
  CHECK(e.line() == 2);
  e = parse_error("R1 1 0 1\nMQ1 1 0 chua_w");
  CHECK(std::string(e.what()).find("chua_w") != std::string::npos);
  e = parse_error("R1 1 0 1\nMC1 1 0 josephson_mc(1, 0, 1, 1)");
  CHECK(std::string(e.what()).find("k1") != std::string::npos);
  e = parse_error("R1 1 0 1\n.ic q(R1) 1");
  CHECK(e.line() == 2);
  e = parse_error("R1 1 0 1\nC1 1 0 expr v +");
  CHECK(e.line() == 2);
}

TEST_CASE("graph-level errors") {
  CHECK_THROWS_AS(parse_netlist("R1 1 0 1\nR2 2 3 1"), CircuitError);
  CHECK_THROWS_AS(parse_netlist("R1 1 2 1"), CircuitError);
  CHECK_THROWS_AS(parse_netlist("# nothing\n"), CircuitError);
  CHECK_NOTHROW(parse_netlist(".ref a\nR1 a b 1"));
}

TEST_CASE("reduced incidence") {
  IncidenceMatrix a = reduced_incidence(parse_netlist("R1 1 0 1"));
  CHECK(a.matrix.rows() == 1);
  CHECK(a.matrix(0, 0) == 1);

  Circuit tri = parse_netlist(".ref 3\nR1 1 2 1\nR2 2 3 1\nR3 3 1 1");
  Eigen::MatrixXi expected(2, 3);
  expected << 1, 0, -1, -1, 1, 0;
  CHECK(reduced_incidence(tri).matrix == expected);

  Circuit flipped = parse_netlist(".ref 3\nR1 2 1 1\nR2 2 3 1\nR3 3 1 1");
  // node 2 is met first, so its row comes first
  Eigen::MatrixXi flipped_expected(2, 3);
  flipped_expected << 1, 1, 0, -1, 0, -1;
  CHECK(reduced_incidence(flipped).matrix == flipped_expected);
  CHECK(flipped.row_labels() == std::vector<std::string>{"2", "1"});
}

TEST_CASE("incidence invariants on every fixture") {
  for (const std::string& name : testing::wellposed_fixtures()) {
    Circuit c = testing::load_fixture(name);
    IncidenceMatrix a = reduced_incidence(c);
    INFO(name);
    std::vector<int> seen(static_cast<std::size_t>(c.branch_count()), 0);
    for (const auto& [cls, cols] : a.column_partition)
      for (int j : cols) {
        ++seen[static_cast<std::size_t>(j)];
        CHECK(c.branches()[static_cast<std::size_t>(j)].device.cls == cls);
      }
    for (int s : seen) CHECK(s == 1);
    for (int j = 0; j < c.branch_count(); ++j) {
      const Branch& b = c.branches()[static_cast<std::size_t>(j)];
      bool touches_ref = b.from == c.reference() || b.to == c.reference();
      int sum = a.matrix.col(j).sum();
      CHECK(std::abs(sum) == (touches_ref ? 1 : 0));
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a.matrix.cast<double>());
    CHECK(lu.rank() == c.node_count() - 1);
  }
}

TEST_CASE("canonical printing is a fixed point") {
  std::vector<std::string> names = testing::wellposed_fixtures();
  names.push_back("illposed/v_loop.ckt");
  for (const std::string& name : names) {
    INFO(name);
    std::string once = to_netlist(testing::load_fixture(name));
    std::string twice = to_netlist(parse_netlist(once));
    CHECK(once == twice);
  }
}

TEST_CASE("directives") {
  Circuit c = parse_netlist(".param g 4\nG1 1 0 expr g*v\nC1 1 0 1\n.ic q(C1) 0.5\n.end\nR9 1 0 1");
  CHECK(c.branch_count() == 2);
  REQUIRE(c.initial_conditions().size() == 1);
  CHECK(c.initial_conditions()[0].variable == "q(C1)");
  Point p;
  p.v = 2;
  CHECK(c.branches()[0].device.characteristic->eval(p) == doctest::Approx(8));
}

TEST_CASE("row order follows first appearance") {
  Circuit c = parse_netlist("R1 b a 1\nR2 a 0 1\nR3 c 0 1\nR4 b c 1");
  CHECK(c.row_labels() == std::vector<std::string>{"b", "a", "c"});
}
