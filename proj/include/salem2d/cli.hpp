#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace salem2d {

// Parses and runs one subcommand. Returns the process exit code
// (0 ok, 2 usage, 3 numeric/verification failure, 4 search failure).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace salem2d
