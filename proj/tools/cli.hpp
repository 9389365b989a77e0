#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vsnit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Parses and runs one subcommand (gen, train, recover, eval, compare).
// args[0] is the program name. Diagnostics go to `err`, progress to `log`.
int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

int run(int argc, char** argv);

}  // namespace vsnit::cli
