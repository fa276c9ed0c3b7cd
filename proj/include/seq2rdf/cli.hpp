#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace seq2rdf::cli {

// Runs one sub-command. `args` excludes the program name.
// Returns 0 on success, 1 on runtime or I/O failure, 2 on a usage error.
int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
             std::ostream& err);

}  // namespace seq2rdf::cli
