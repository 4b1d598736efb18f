#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dsopt {

inline constexpr const char* kDsoptVersion = "0.1.0";
inline constexpr int kArtifactVersion = 1;

enum ExitCode : int { exit_ok = 0, exit_check_failed = 1, exit_config_error = 2, exit_runtime_error = 3 };

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutputDirEnv = "DSOPT_OUTPUT_DIR";

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dsopt
