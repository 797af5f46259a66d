#include "support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "memkit/topology.hpp"

namespace memkit::testing {

std::string fixture_path(const std::string& name) { return std::string(MEMKIT_FIXTURES) + "/" + name; }

std::string read_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  if (!in) throw std::runtime_error("missing fixture " + name);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Circuit load_fixture(const std::string& name) { return parse_netlist(read_fixture(name)); }

std::vector<std::string> nondegenerate_fixtures() {
  return {"rc.ckt",           "gc.ckt",
          "rlc_series.ckt",   "ladder.ckt",
          "nonlinear_rc.ckt", "chua_m_drive.ckt",
          "chua_w_drive.ckt", "memcap.ckt",
          "meminductor.ckt",  "hm_series.ckt",
          "hw_parallel.ckt",  "josephson_a.ckt",
          "josephson_b.ckt",  "chua_series_pair.ckt",
          "chua_series_hybrid.ckt", "chua_parallel_pair.ckt",
          "chua_parallel_hybrid.ckt", "mixed_all.ckt"};
}

std::vector<std::string> degenerate_fixtures() {
  return {"degenerate/vc_loop.ckt",    "degenerate/c_mc_loop.ckt",   "degenerate/c_loop.ckt",
          "degenerate/i_l_cutset.ckt", "degenerate/i_ml_cutset.ckt", "degenerate/l_ml_cutset.ckt"};
}

std::vector<std::string> wellposed_fixtures() {
  std::vector<std::string> all = nondegenerate_fixtures();
  for (const std::string& f : degenerate_fixtures()) all.push_back(f);
  return all;
}

std::vector<std::string> memristive_fixtures() {
  std::vector<std::string> out;
  for (const std::string& f : nondegenerate_fixtures()) {
    Circuit c = load_fixture(f);
    for (const Branch& b : c.branches()) {
      DeviceClass k = b.device.cls;
      if (k == DeviceClass::q_memristor || k == DeviceClass::phi_memristor || k == DeviceClass::memcapacitor ||
          k == DeviceClass::meminductor || k == DeviceClass::hybrid_m || k == DeviceClass::hybrid_w) {
        out.push_back(f);
        break;
      }
    }
  }
  return out;
}

namespace {

class SeriesParallel {
 public:
  explicit SeriesParallel(std::mt19937_64& rng) : rng_(rng) {}

  std::string build() {
    lines_.clear();
    next_node_ = 2;
    count_ = 0;
    grow(1, 0, 3);
    std::ostringstream out;
    for (const std::string& l : lines_) out << l << '\n';
    return out.str();
  }

 private:
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }

  void element(int a, int b) {
    double r = uniform(0, 1);
    const char* kind = r < 0.25 ? "R" : r < 0.45 ? "G" : r < 0.7 ? "C" : r < 0.93 ? "L" : r < 0.965 ? "V" : "I";
    std::ostringstream line;
    line << kind << ++count_ << ' ' << a << ' ' << b << ' ';
    if (kind[0] == 'V' || kind[0] == 'I') {
      line << "dc " << uniform(0.1, 10);
    } else {
      line.precision(17);
      line << uniform(0.1, 10);
    }
    lines_.push_back(line.str());
  }

  void grow(int a, int b, int depth) {
    double r = uniform(0, 1);
    if (depth == 0 || r < 0.3) {
      element(a, b);
    } else if (r < 0.65) {
      int m = next_node_++;
      grow(a, m, depth - 1);
      grow(m, b, depth - 1);
    } else {
      grow(a, b, depth - 1);
      grow(a, b, depth - 1);
    }
  }

  std::mt19937_64& rng_;
  std::vector<std::string> lines_;
  int next_node_ = 2;
  int count_ = 0;
};

}  // namespace

std::string random_linear_netlist(std::mt19937_64& rng) {
  SeriesParallel sp(rng);
  for (;;) {
    std::string text = sp.build();
    if (check_wellposed(parse_netlist(text)).ok()) return text;
  }
}

}  // namespace memkit::testing
