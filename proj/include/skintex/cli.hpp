#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace skintex::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the `skintex` command line. Machine-readable output goes to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with argv[0] omitted.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace skintex::cli
