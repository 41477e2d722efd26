#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hpcwatch {

enum ExitCode : int {
    kExitClean = 0,
    kExitError = 1,    // usage or data error
    kExitCapture = 2,  // capture environment error
    kExitAlerts = 3,
};

/// Environment variable naming a default config file.
inline constexpr const char* kConfigEnv = "HPCWATCH_CONFIG";

/// Runs one CLI invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace hpcwatch
