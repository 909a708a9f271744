#ifndef BCB_TOOLS_CLI_HPP
#define BCB_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace bcb::cli {

/// Process exit codes.
enum Exit : int {
  kOk = 0,
  kInvalidInput = 2,
  kDynamicsFailure = 3,
  kReductionFailure = 4,
};

/// Runs the command line `args` (args[0] is the program name). Data goes to
/// `out` unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Shortest decimal string that parses back to exactly `x`.
std::string format_double(double x);

}  // namespace bcb::cli

#endif  // BCB_TOOLS_CLI_HPP
