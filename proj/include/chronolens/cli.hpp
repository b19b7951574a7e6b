#pragma once

#include <string>
#include <vector>

namespace chronolens {

// Full command-line entry point, callable in-process by tests. args holds the
// arguments after the program name. Returns the process exit code:
// 0 success, 2 configuration error, 3 feasibility failure, 4 numerical-window
// error.
int cli_main(std::vector<std::string> args);

}  // namespace chronolens
