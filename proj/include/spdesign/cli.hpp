#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spd {

/// Runs the command line (args excludes the program name). Returns the exit
/// code: 0 ok, 1 runtime error, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace spd
