#pragma once

#include <iosfwd>

namespace multiroc {

// Entry point of the `multiroc` tool. Returns the process exit code:
// 0 success, 1 input error, 2 numerical failure.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace multiroc
