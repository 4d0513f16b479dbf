#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conevol {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,      // flag or cone-spec parse error
  kExitNumerical = 3,  // estimator guard or other library error
  kExitCheck = 4,      // a comparison or acceptance check failed
};

/// Runs one command line (without the program name). Artifacts go to `out`
/// unless --output names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace conevol
