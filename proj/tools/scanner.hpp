#pragma once

#include <iosfwd>

namespace ptsw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDomain = 2;

/// Parses the command line and runs one subcommand. Artifacts go to the
/// --output file, or to `out` when no file is given (the one-line summary
/// then moves to `err`).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ptsw::cli
