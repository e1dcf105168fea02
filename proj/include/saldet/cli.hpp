#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace saldet {

/// Full command-line entry point, stream-injected so tests can capture
/// output. args excludes the program name. Exit codes: 0 success, 1 IO or
/// parse failure, 2 invalid data or configuration (and usage errors), 3
/// diverged training.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

} // namespace saldet
