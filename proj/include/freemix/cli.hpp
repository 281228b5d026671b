#pragma once

#include <iosfwd>

namespace freemix::cli {

/// Exit codes: 0 success, 1 usage error, 2 numerical degeneracy, 3 solver failure.
enum ExitCode : int { ok = 0, usage = 1, degenerate = 2, solver = 3 };

/// Runs the freemix command line (p-estimate, density, demo). JSON goes to
/// `out`, diagnostics and usage text to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace freemix::cli
