#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gapforge::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kAllCellsFailed = 3 };

/// Runs one invocation. `args` excludes the program name. Results go to `out`
/// (or to the -o file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gapforge::cli
