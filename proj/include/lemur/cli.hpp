#pragma once

namespace lemur {

// Exit status of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitPlugin = 3,
};

int run_cli(int argc, char** argv);

}  // namespace lemur
