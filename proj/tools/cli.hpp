#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace semplan::cli {

enum ExitCode { kOk = 0, kUsage = 1, kNoSolution = 2, kViolation = 3 };

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semplan::cli
