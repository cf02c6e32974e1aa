#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace narrative {

// Entry point of the `narrative` command. Returns the process exit code:
// 0 on success, 1 on runtime errors, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace narrative
