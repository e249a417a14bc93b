#pragma once

#include <iosfwd>

namespace mwsmpc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Runs one subcommand (mission, batch, surface, lqr, oracle) and returns the exit status.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mwsmpc::cli
