#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phl {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitResourceLimit = 3,
};

/// Runs `phl <subcommand> ...`; args exclude the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phl
