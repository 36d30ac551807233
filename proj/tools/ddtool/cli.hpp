#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ddtool {

enum ExitCode : int {
  kExitSuccess = 0,
  kExitVerificationFailed = 1,
  kExitUsage = 2,
  kExitNumerical = 3,
};

/// The only environment variable read: default parent directory for outputs.
inline constexpr const char* kOutputRootEnv = "HODD_OUTPUT_ROOT";

/// Runs one subcommand; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddtool
