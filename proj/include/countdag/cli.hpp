#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace countdag::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitAlgorithm = 3;

// Entry point behind the `countdag` binary; args excludes the program name.
// Subcommands: learn, simulate, bench.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace countdag::cli
