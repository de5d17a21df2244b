#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gboc::cli {

// Runs one command line (args excludes the program name). Data goes to files
// or `out`; logs and diagnostics go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gboc::cli
