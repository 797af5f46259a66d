#pragma once

#include <string>

#include "memkit/index.hpp"
#include "memkit/netlist.hpp"
#include "memkit/topology.hpp"

namespace memkit {

enum class ReportFormat { human, machine };

// Per-device table: name, class, differential order, state order, controlling variables.
std::string render_classification(const Circuit& circuit, ReportFormat format);

std::string render_degeneracy(const Circuit& circuit, const DegeneracyReport& report, ReportFormat format);

// One-line verdict, e.g. "degenerate: VCM-loop {V1, C1}; tractability index 2".
std::string index_summary(const Circuit& circuit, const IndexReport& report);

std::string render_index(const SemiExplicitDAE& dae, const IndexReport& report, ReportFormat format);

}  // namespace memkit
