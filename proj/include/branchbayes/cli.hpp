#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace branchbayes {

// Parses the argument list (without the program name), dispatches to the
// library, and writes serialized output. Returns 0 on success, 1 on a usage
// error, 2 on a numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace branchbayes
