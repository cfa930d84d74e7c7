#pragma once

#include <string>
#include <vector>

namespace mccsim {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInvalid = 1,
  kExitDegraded = 2,
  kExitIo = 3,
};

/// Entry point of the `mccsim` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace mccsim
