#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cautious {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitModel = 3,
  kExitImpossible = 4,
};

/// Runs one CLI invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cautious
