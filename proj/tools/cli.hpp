#pragma once

#include <iosfwd>

namespace modcomp::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kDiverged = 2,
  kAssertFailed = 3,
};

/// Entry point of the `modcomp` tool; writes results to `out` and
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace modcomp::cli
