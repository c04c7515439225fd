#pragma once

#include <string>
#include <vector>

namespace tdhorde {

/// Entry point behind the tdhorde executable. Exit codes: 0 success,
/// 1 unexpected error, 2 bad usage or configuration, 3 unreadable or
/// malformed data files, 4 diverged learner (message names the GVF).
int run_main(int argc, const char* const* argv);

/// Overload for tests; args excludes the program name.
int run_main(const std::vector<std::string>& args);

}  // namespace tdhorde
