#pragma once

#include <functional>
#include <iosfwd>

namespace catcov {

enum ExitCode : int { exit_ok = 0, exit_unexpected = 1, exit_input = 2, exit_numerical = 3 };

/// Runs the `catcov` command line. Artifacts without `--out` go to `out`;
/// diagnostics and warnings go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs `body`, reporting `InputError` as exit 2, `NumericalError` as exit 3
/// and anything else as exit 1.
int run_guarded(const std::function<int()>& body, std::ostream& err);

} // namespace catcov
