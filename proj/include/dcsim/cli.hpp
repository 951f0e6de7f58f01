#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dcsim::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitFailure = 1, ///< validation or domain failure, bad usage
    kExitIo = 2,
};

/// Runs the command line `dcsim <args...>` (args excludes the program name).
/// Protocol traffic for `run --policy external` uses in/out; diagnostics go
/// to err.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace dcsim::cli
