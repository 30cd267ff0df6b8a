#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qefrate {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kParse = 2,
  kValidation = 3,
  kGammaSingular = 4,
  kStabilizingLost = 5,
  kThetaThreshold = 6,
};

// Runs one command line (args excludes the program name). Results go to `out`
// unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qefrate
