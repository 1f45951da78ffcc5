#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace normy::cli {

/// Environment variable that overrides the configured scorer endpoint.
inline constexpr const char* kEndpointEnv = "NORMY_SCORER_ENDPOINT";

/// Runs one invocation. `args` excludes the program name. Returns 0 on
/// success, 1 on runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace normy::cli
