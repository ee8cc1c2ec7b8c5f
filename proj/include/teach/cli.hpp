#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace teach::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Runs one subcommand (gen-hyp, select, difficulty, simulate, serve). `args` excludes the
/// program name. Diagnostics and the resolved configuration go to `log`.
int run(const std::vector<std::string>& args, std::ostream& log);

/// "inf" (any case) or a positive real.
double parse_positive_or_inf(const std::string& text);

} // namespace teach::cli
