#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lastdd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitFlagged = 2;

/// Runs one command line (args excludes the program name). Reports go to
/// out, diagnostics to err. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace lastdd::cli
