#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fplab {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitCertificate = 2,
  kExitRuntime = 3,
  kExitUsage = 64,
};

/// Entry point of the `fplab` tool. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fplab
