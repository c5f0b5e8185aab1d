#pragma once

#include <ostream>

namespace apml {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitComputation = 2;

/// Entry point of the `apml` tool; streams are injectable for testing.
int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err);

} // namespace apml
