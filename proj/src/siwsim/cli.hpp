#pragma once

#include <ostream>

namespace siwsim::cli {

// Full command-line front end. Returns the process exit code: 0 on
// success, 2 for invalid input or configuration, 3 for runtime failures.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace siwsim::cli
