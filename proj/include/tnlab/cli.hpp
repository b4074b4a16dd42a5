#pragma once

// Batch entry point. Subcommands: verify, family, residual, area, variation,
// classify, export. Options may come from an INI file given with --config;
// flags on the command line win. Relative output paths are resolved against
// $TNLAB_OUTPUT_DIR when it is set.
//
// Exit status: 0 all checks pass, 1 a check failed, 2 configuration error,
// 3 I/O error.

#include <iosfwd>

namespace tnlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

/// Runs one invocation; the JSON report goes to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tnlab::cli
