#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qendy::cli {

/// Runs the command line `args` (args[0] is the program name). Returns the exit code;
/// normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qendy::cli
