#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairmeta::cli {

/// Runs one subcommand. `args` excludes the program name.
/// Returns 0 on success, 1 on an operational error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairmeta::cli
