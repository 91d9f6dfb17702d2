#pragma once

#include <string>
#include <vector>

namespace sharp::cli {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kIo = 2,
  kFormat = 3,
  kUsage = 4,
  kConsistency = 5,
};

// Entry point used by main and by the tests. Diagnostics go to stderr,
// results to stdout.
int run(const std::vector<std::string>& args);

}  // namespace sharp::cli
