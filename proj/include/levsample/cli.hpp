#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace levsample {

/// Exit codes of the levsample command.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitIo = 4,
};

/// Runs the levsample command line. `args` excludes the program name.
/// Data goes to `out`, progress and diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace levsample
