#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qnuis::cli {

enum ExitCode { Success = 0, PropertyFailure = 1, InvalidInput = 2, Infeasible = 3 };

/// Runs `qnuis <args...>` (args excludes the program name). Results go to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qnuis::cli
