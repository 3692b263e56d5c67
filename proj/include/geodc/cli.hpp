#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace geodc {

// Runs one CLI invocation (args exclude the program name) writing to the
// given streams. Exit codes: 0 success, 1 infeasible scenario, 2 config
// error, 64 usage error, 70 internal error. The binary in tools/ is a thin
// wrapper; tests call this directly.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geodc
