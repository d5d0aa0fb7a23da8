#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spinregen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses `args` (without the program name), runs the subcommand and returns
/// the process exit code. Human-readable results go to `out`, diagnostics and
/// usage text to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spinregen::cli
