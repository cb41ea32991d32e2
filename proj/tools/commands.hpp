#pragma once

#include <ostream>

namespace dpdlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv and runs one subcommand. Data goes to `out`, diagnostics to
/// `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dpdlab::cli
