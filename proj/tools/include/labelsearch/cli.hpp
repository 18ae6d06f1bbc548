#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace labelsearch::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,       // configuration, format, data and I/O errors
  kExitNumerical = 3,  // divergence or degenerate parameters
};

/// Runs one subcommand. `args` excludes the program name. Summaries go to
/// `out`, diagnostics and usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

}  // namespace labelsearch::cli
