#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace phasebal::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kNonConvergence = 2,
  kInternalError = 3,
};

// Entry point of the phasebal tool: simulate, optimize, validate,
// export-scenario. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace phasebal::cli
