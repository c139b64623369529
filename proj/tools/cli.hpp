#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spreader_gnn::cli {

// Runs one invocation. args excludes the program name. Data goes to out,
// diagnostics to err. Returns the process exit code: 0 on success, 2 for
// invalid flags or configuration, 1 for any other failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spreader_gnn::cli
