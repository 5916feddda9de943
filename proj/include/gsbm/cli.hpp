#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gsbm {

/// Runs the command line front end. Results go to `out` (or the --out
/// file); failures are written to `err` as one line of JSON
/// {"code": ..., "message": ...}. Returns 0 on success, 1 for invalid
/// input, 2 for a numerical failure and 3 for an I/O failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Help text of the program and every subcommand, as printed by
/// --help-all.
std::string cli_help_all();

}  // namespace gsbm
