#pragma once

#include <ostream>

namespace twistlap::cli {

// Exit codes of the command line.
inline constexpr int kOk = 0;           // the run completed, whatever its checks say
inline constexpr int kFailure = 1;      // unexpected error
inline constexpr int kBadConfig = 2;    // usage, configuration or precondition error
inline constexpr int kNoConvergence = 3;

// Entry point of the twistlap command; the tests drive it directly.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twistlap::cli
