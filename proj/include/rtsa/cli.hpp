#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rtsa {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitRuntime = 2,
  kExitHypothesisViolation = 3,
};

/// Entry point of the `rtsa` tool. `args[0]` is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rtsa
