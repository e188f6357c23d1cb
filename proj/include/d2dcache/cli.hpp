#pragma once

#include <string>
#include <vector>

namespace d2d {

// Command-line entry point, also callable in-process by tests.
// Exit codes: 0 success; 1 user/config error (one-line diagnostic on stderr);
// 2 internal invariant violation.
int cli_main(int argc, const char* const* argv);

// Convenience overload; `args` excludes the program name.
int cli_main(const std::vector<std::string>& args);

}  // namespace d2d
