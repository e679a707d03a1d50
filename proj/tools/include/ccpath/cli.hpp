#pragma once

#include <ostream>

namespace ccpath {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kWriteIo = 3,
  kReadIo = 4,
  kMetadata = 5,
  kUnmapped = 6,
};

/// Runs the command line; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ccpath
