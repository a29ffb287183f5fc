#pragma once

#include <iosfwd>

namespace hypoco {

// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_numerical = 2, exit_strict = 3 };

// Runs the front end with argv[0] the program name; normal output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hypoco
