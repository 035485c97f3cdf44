#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qmpi {

// The launcher command line, callable in-process so tests can drive it
// without spawning. `args` holds the arguments after the executable name.
// Prints per-rank output with "rank=<r>: " prefixes plus a shot summary,
// and returns the process exit code: 0 on success, 2 on a usage error,
// 1 when the run itself fails.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qmpi
