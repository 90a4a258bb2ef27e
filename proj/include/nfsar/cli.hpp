#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nfsar::cli {

/// Process exit codes.
enum ExitCode : int { ok = 0, config_error = 2, numeric_error = 3, io_error = 4 };

/// Runs one `nfsar` command line (args excludes the program name) and
/// returns the exit code. Progress goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nfsar::cli
