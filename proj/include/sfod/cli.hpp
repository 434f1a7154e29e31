#pragma once

#include <iosfwd>

namespace sfod {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point of the `sfod` tool. Returns the process exit status; errors
/// are reported as a single line on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sfod
