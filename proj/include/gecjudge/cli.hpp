#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gecjudge::cli {

/// Stable exit codes for scripting.
enum ExitCode : int {
  kSuccess = 0,
  kFatal = 1,
  kPartial = 2,        // some pairs failed in non-strict mode
  kInconsistent = 3,   // ahp-check verdict: CR >= theta
};

/// Runs the command line (args excludes the program name). Results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gecjudge::cli
