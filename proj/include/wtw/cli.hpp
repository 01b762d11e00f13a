#pragma once

namespace wtw::cli {

/// Exit codes: 0 success, 2 validation or infeasible constraints, 3 I/O, 4 non-convergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNotConverged = 4;

/// Entry point of the `wtw` tool: subcommands fit, expect, sample, compare, synth.
int run(int argc, char** argv);

} // namespace wtw::cli
