#pragma once

#include <iostream>

namespace annulus {

/// Entry point of the `annulus` tool. Returns the process exit code:
/// 0 success, 2 I/O, 3 schema/usage, 4 data, 5 numerical.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

} // namespace annulus
