#pragma once

#include <ostream>

namespace reclab {

/// Full command-line entry point. Returns the process exit code: 0 on
/// success, 2 on configuration or usage errors, 3 on numerical guards.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace reclab
