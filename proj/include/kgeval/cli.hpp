#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kgeval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// args[0] is the program name. Streams stand in for stdin/stdout/stderr.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace kgeval::cli
