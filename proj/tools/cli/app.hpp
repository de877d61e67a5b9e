#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace s2s::cli {

// Parses arguments, resolves the configuration and dispatches a subcommand.
// Returns the process exit status.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace s2s::cli
