#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace memkit::cli {

enum ExitCode { kOk = 0, kRefused = 1, kInputError = 2 };

// Runs `memkit <subcommand> <netlist...> [options]`; args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace memkit::cli
