#include <doctest.h>

#include <random>

#include "memkit/netlist.hpp"
#include "memkit/topology.hpp"
#include "support.hpp"

using namespace memkit;

namespace {

std::string names(const Circuit& c, const std::optional<Witness>& w) { return w ? witness_names(c, *w) : "none"; }

int rank_of(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0;
  return static_cast<int>(Eigen::FullPivLU<Eigen::MatrixXd>(m).rank());
}

// Rank characterizations of the two degeneracies.
bool vcm_by_rank(const Circuit& c) {
  IncidenceMatrix a = reduced_incidence(c);
  Eigen::MatrixXd m = a.columns({DeviceClass::capacitor, DeviceClass::memcapacitor, DeviceClass::voltage_source});
  return rank_of(m) < m.cols();
}

bool ilm_by_rank(const Circuit& c) {
  IncidenceMatrix a = reduced_incidence(c);
  using DC = DeviceClass;
  Eigen::MatrixXd m = a.columns({DC::capacitor, DC::memcapacitor, DC::voltage_source, DC::conductor,
                                 DC::phi_memristor, DC::resistor, DC::q_memristor, DC::hybrid_m, DC::hybrid_w});
  return rank_of(m) < c.node_count() - 1;
}

}  // namespace

TEST_CASE("well-posedness") {
  Circuit vv = parse_netlist("V1 1 0 dc 1\nV2 1 0 dc 2\nR1 1 0 1");
  WellPosedness w = check_wellposed(vv);
  CHECK(w.kind == WellPosedness::Kind::v_loop);
  CHECK(witness_names(vv, w.witness) == "{V1, V2}");

  Circuit bridge = parse_netlist("R1 1 0 1\nC1 1 0 1\nI1 1 2 dc 1\nR2 2 3 1\nR3 3 2 2");
  w = check_wellposed(bridge);
  CHECK(w.kind == WellPosedness::Kind::i_cutset);
  CHECK(witness_names(bridge, w.witness) == "{I1}");

  Circuit only_i = parse_netlist("R1 1 0 1\nI1 1 2 dc 1\nR2 2 3 1\nI2 3 0 dc 1");
  // node pair {2,3} joins the rest only through I1 and I2
  w = check_wellposed(only_i);
  CHECK(w.kind == WellPosedness::Kind::i_cutset);
  CHECK(witness_names(only_i, w.witness) == "{I1, I2}");

  Circuit single = parse_netlist("R1 1 0 1\nI1 1 2 dc 1\nR2 2 1 1");
  CHECK(check_wellposed(single).ok());

  CHECK(check_wellposed(parse_netlist("V1 1 0 dc 1\nR1 1 0 1")).ok());
}

TEST_CASE("VCM loops") {
  Circuit vc = parse_netlist("V1 1 0 dc 1\nC1 1 0 1\nR1 1 0 1");
  CHECK(names(vc, vcm_loop_exists(vc)) == "{V1, C1}");
  Circuit vmc = parse_netlist("V1 1 0 dc 1\nMC1 1 0 josephson_mc(1, 1, 0.5, 1)");
  CHECK(names(vmc, vcm_loop_exists(vmc)) == "{V1, MC1}");
  Circuit tri = parse_netlist("V1 1 2 dc 1\nC1 2 3 1\nR1 3 1 1\nR2 3 0 1");
  CHECK_FALSE(vcm_loop_exists(tri));
  Circuit cmc = parse_netlist("C1 1 0 1\nMC1 1 0 josephson_mc(1, 1, 0.5, 1)\nR1 1 0 1");
  CHECK(degeneracy_report(cmc).vcm_loop.has_value());
  CHECK_FALSE(degeneracy_report(cmc).nondegenerate);
}

TEST_CASE("ILM cutsets") {
  Circuit il = testing::load_fixture("degenerate/i_l_cutset.ckt");
  CHECK(names(il, ilm_cutset_exists(il)) == "{I1, L1}");
  Circuit lr = parse_netlist("L1 1 0 1\nR1 1 0 1");
  CHECK_FALSE(ilm_cutset_exists(lr));
  Circuit ml_bridge = parse_netlist(
      "R1 1 0 1\nC1 1 0 1\n"
      "ML1 1 2 expr (1 + q^2)*i\n"
      "R2 2 3 1\nC2 3 2 1\nR3 2 4 1\nC3 4 3 1");
  CHECK(names(ml_bridge, ilm_cutset_exists(ml_bridge)) == "{ML1}");
  Circuit series_rc = parse_netlist("V1 1 0 sine 1 1\nR1 1 2 1\nC1 2 0 1");
  CHECK(degeneracy_report(series_rc).nondegenerate);
}

TEST_CASE("witnesses are genuine loops and cutsets") {
  std::vector<std::string> all = testing::wellposed_fixtures();
  for (const std::string& name : all) {
    INFO(name);
    Circuit c = testing::load_fixture(name);
    DegeneracyReport r = degeneracy_report(c);
    CHECK(r.nondegenerate == (!r.vcm_loop && !r.ilm_cutset));
    CHECK(r.vcm_loop.has_value() == vcm_by_rank(c));
    CHECK(r.ilm_cutset.has_value() == ilm_by_rank(c));
    IncidenceMatrix a = reduced_incidence(c);
    if (r.vcm_loop) {
      for (int j : r.vcm_loop->branches) {
        DeviceClass k = c.branches()[static_cast<std::size_t>(j)].device.cls;
        CHECK((k == DeviceClass::voltage_source || k == DeviceClass::capacitor || k == DeviceClass::memcapacitor));
      }
      // the witness columns are dependent: a cycle
      Eigen::MatrixXd cols(a.matrix.rows(), static_cast<Eigen::Index>(r.vcm_loop->branches.size()));
      for (std::size_t k = 0; k < r.vcm_loop->branches.size(); ++k)
        cols.col(static_cast<Eigen::Index>(k)) = a.matrix.col(r.vcm_loop->branches[k]).cast<double>();
      CHECK(rank_of(cols) < cols.cols());
    }
    if (r.ilm_cutset) {
      std::vector<bool> drop(static_cast<std::size_t>(c.branch_count()), false);
      for (int j : r.ilm_cutset->branches) {
        DeviceClass k = c.branches()[static_cast<std::size_t>(j)].device.cls;
        CHECK((k == DeviceClass::current_source || k == DeviceClass::inductor || k == DeviceClass::meminductor));
        drop[static_cast<std::size_t>(j)] = true;
      }
      Eigen::MatrixXd rest(a.matrix.rows(), 0);
      for (int j = 0; j < c.branch_count(); ++j) {
        if (drop[static_cast<std::size_t>(j)]) continue;
        rest.conservativeResize(Eigen::NoChange, rest.cols() + 1);
        rest.col(rest.cols() - 1) = a.matrix.col(j).cast<double>();
      }
      CHECK(rank_of(rest) < c.node_count() - 1);
    }
  }
}

TEST_CASE("graph kernel bases") {
  for (const std::string& name : testing::wellposed_fixtures()) {
    INFO(name);
    Circuit c = testing::load_fixture(name);
    IncidenceMatrix a = reduced_incidence(c);
    using DC = DeviceClass;
    Eigen::MatrixXd avcm = a.columns({DC::capacitor, DC::memcapacitor, DC::voltage_source});
    Eigen::MatrixXd loops = vcm_loop_basis(c);
    CHECK(loops.rows() == avcm.cols());
    if (loops.cols() > 0) {
      CHECK((avcm * loops).norm() == 0.0);
      CHECK(rank_of(loops) == loops.cols());
    }
    CHECK(loops.cols() == avcm.cols() - rank_of(avcm));

    Eigen::MatrixXd other = a.columns({DC::capacitor, DC::memcapacitor, DC::voltage_source, DC::conductor,
                                       DC::phi_memristor, DC::resistor, DC::q_memristor, DC::hybrid_m, DC::hybrid_w});
    Eigen::MatrixXd cuts = ilm_cut_basis(c);
    CHECK(cuts.rows() == c.node_count() - 1);
    if (cuts.cols() > 0) CHECK((other.transpose() * cuts).norm() == 0.0);
    CHECK(cuts.cols() == c.node_count() - 1 - rank_of(other));
  }
}

TEST_CASE("random graphs: union-find agrees with rank tests") {
  std::mt19937_64 rng(2024);
  const char* kinds[] = {"R", "C", "L", "V", "I", "G"};
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    int nodes = 2 + static_cast<int>(rng() % 5);
    int branches = nodes - 1 + static_cast<int>(rng() % 5);
    std::string text;
    // spanning path keeps the graph connected
    for (int k = 0; k < branches; ++k) {
      int a = k < nodes - 1 ? k : static_cast<int>(rng() % static_cast<unsigned>(nodes));
      int b = k < nodes - 1 ? k + 1 : static_cast<int>(rng() % static_cast<unsigned>(nodes));
      if (a == b) continue;
      const char* kind = kinds[rng() % 6];
      text += std::string(kind) + std::to_string(k) + " " + std::to_string(a) + " " + std::to_string(b) +
              (kind[0] == 'V' || kind[0] == 'I' ? " dc 1\n" : " 1\n");
    }
    Circuit c = parse_netlist(text);
    CHECK(vcm_loop_exists(c).has_value() == vcm_by_rank(c));
    CHECK(ilm_cutset_exists(c).has_value() == ilm_by_rank(c));
    ++checked;
  }
  CHECK(checked == 300);
}
