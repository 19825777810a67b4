#pragma once

#include <ostream>

namespace uotlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNonConvergence = 2;
inline constexpr int kExitCheckFailed = 3;

/// Entry point of the `uotlab` tool. Output goes to `out`, diagnostics and
/// usage text to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace uotlab::cli
