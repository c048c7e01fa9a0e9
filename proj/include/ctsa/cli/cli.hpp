#pragma once

#include <ostream>

namespace ctsa::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;        // e.g. a bench determinism check failed
inline constexpr int kExitBaseDiverged = 2;   // base-case load flow did not converge
inline constexpr int kExitInputError = 3;     // bad arguments or unreadable / invalid input

// Entry point of the `ctsa` tool: scan, dm-train, bench and serve.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctsa::cli
