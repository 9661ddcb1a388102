#pragma once

#include <ostream>

namespace riskalloc::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDegenerate = 2,
  kCheckFailed = 3,
};

/// Runs one subcommand (allocate, membership, verify, gradient-check).
/// Results go to `out` unless --out names a file; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace riskalloc::cli
