#pragma once

#include <random>
#include <string>
#include <vector>

#include "memkit/netlist.hpp"

namespace memkit::testing {

std::string fixture_path(const std::string& name);
std::string read_fixture(const std::string& name);
Circuit load_fixture(const std::string& name);

// Well-posed, topologically nondegenerate fixtures with positive incremental
// matrices at their evaluation points.
std::vector<std::string> nondegenerate_fixtures();
// VCM-loop and ILM-cutset fixtures (index two).
std::vector<std::string> degenerate_fixtures();
std::vector<std::string> wellposed_fixtures();
// Fixtures containing memristive devices (MQ, MW, MC, ML, HM, HW).
std::vector<std::string> memristive_fixtures();

// Random well-posed linear circuit built by recursive series/parallel
// composition of R, G, C, L elements (values uniform in [0.1, 10]) between
// node 1 and the reference, with an occasional dc source.
std::string random_linear_netlist(std::mt19937_64& rng);

}  // namespace memkit::testing
