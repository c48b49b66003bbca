#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssgmark {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `ssgmark` tool. `args` excludes the program name.
/// Writes one JSON summary line to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssgmark
