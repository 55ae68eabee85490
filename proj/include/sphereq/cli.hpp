#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sphereq::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kInfeasible = 2,
  kOptimizerFailure = 3,
  kVerificationFailed = 4,
};

/// Runs the command line `args` (args[0] is the program name). Reads a
/// "-" config from `in`, prints the human summary to `out` and diagnostics
/// to `err`, and writes artifacts to the --out directory.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace sphereq::cli
