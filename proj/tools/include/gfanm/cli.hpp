#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gfanm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

/// Runs the gfanm command line in-process. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gfanm::cli
