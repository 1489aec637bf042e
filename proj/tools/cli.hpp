#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace joist::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kRemoteError = 3,
  kNumericalError = 4,
};

/// Runs one CLI invocation. `args` excludes the program name. Payloads go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace joist::cli
