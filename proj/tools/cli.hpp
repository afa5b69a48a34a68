#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cavitypress::cli {

enum ExitCode { ok = 0, parse_error = 1, precondition = 2, tolerance = 3, resource = 4 };

/// Runs one command line (args exclude the program name). Verdicts and reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cavitypress::cli
