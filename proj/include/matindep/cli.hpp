#pragma once

#include <iosfwd>

namespace matindep {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

// Entry point of the `matindep` tool. Subcommands: ind-test, corr-mtc,
// estimate, mc-critical, simulate. Results go to `out` (or to the files named
// by --output / --output-csv / --records); diagnostics go to `err` as a
// single line.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace matindep
