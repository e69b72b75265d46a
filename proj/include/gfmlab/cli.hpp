#pragma once

#include <iosfwd>

namespace gfmlab {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitNumeric = 2,
    kExitUnstable = 3,
};

/// Entry point of the `gfmlab` tool: run, modes, bode, sweep, design-check.
/// Diagnostics go to `err`, one line per error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gfmlab
