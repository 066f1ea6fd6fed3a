#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sqrtreg {

// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

// Runs the command line `argv` (argv[0] is the program name). Results go to
// `out`, diagnostics and usage errors to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sqrtreg
