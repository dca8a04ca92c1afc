#pragma once

#include <ostream>

namespace qnm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNoZero = 2;
inline constexpr int kExitVerifyFailed = 3;

/// Parses argv and runs one subcommand (resonances, optimize, verify,
/// perturb, wmap). Results go to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qnm::cli
