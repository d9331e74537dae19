#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace workrest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the `workrest` binary and the CLI tests. `args`
/// excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace workrest::cli
