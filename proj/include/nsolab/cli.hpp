#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nsolab::cli {

/// Exit codes: 0 success, 1 usage or input error, 2 a run diverged.
enum ExitCode : int { ok = 0, usage_error = 1, diverged = 2 };

/// Runs one command. `args` excludes the program name. Errors are written to
/// `err` as one JSON object per line; a one-line JSON summary goes to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const std::vector<std::string>& figure_ids();

}  // namespace nsolab::cli
