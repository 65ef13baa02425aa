#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mvrbm::cli {

/// Runs one subcommand. `args` excludes the program name. Returns the exit
/// code: 0 success, 1 usage, 2 validation, 3 numeric failure or failed
/// gradient check. Reports go to `out` unless --out names a file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mvrbm::cli
