#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace signface {

/// Runs the command-line tool. `args` excludes the program name.
/// Exit codes: 0 success, 2 data error, 3 usage/config error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace signface
