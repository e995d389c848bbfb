#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hcrf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime or data error
inline constexpr int kExitUsage = 2;

/// Runs one CLI invocation. `args` excludes the program name; results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hcrf::cli
