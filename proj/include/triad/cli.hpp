#pragma once

#include <string>
#include <vector>

namespace triad::cli {

/// Full command-line entry point. Exit codes: 0 success, 1 usage or config
/// error, 2 runtime failure.
int run(int argc, const char* const* argv);

/// Same, from pre-split arguments (without the program name).
int run(const std::vector<std::string>& args);

} // namespace triad::cli
