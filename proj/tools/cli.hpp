#pragma once

#include <ostream>

namespace sigcompose::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kRuntimeFailure = 3,
};

// Entry point for every subcommand. Output goes to `out`, diagnostics to
// `err`. The `serve` subcommand blocks until SIGINT or SIGTERM.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sigcompose::cli
