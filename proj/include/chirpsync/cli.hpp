#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chirpsync::cli {

/// Process exit codes. No others are ever returned.
enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2,
    kEstimationFailure = 3,
};

/// Runs the command line `args` (without the program name). Commands:
///   preamble  write the two-symbol chirp preamble as raw IQ
///   fig1      dump both |R_f| correlation profiles for one frame as CSV
///   fig2      Monte Carlo failure-probability sweep as CSV
///   estimate  estimate the CFO of a received IQ file, report as JSON
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chirpsync::cli
