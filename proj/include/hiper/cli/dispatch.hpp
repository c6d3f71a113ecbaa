#pragma once

#include <iosfwd>

namespace hiper {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;  // a verification gate failed
inline constexpr int kExitUsage = 2;   // bad arguments, config or input files

// Entry point of the `hiper` binary. Human output goes to out, diagnostics to
// err; every file is written under --out.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hiper
