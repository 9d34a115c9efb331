#pragma once

#include <iosfwd>

namespace floqnet::cli {

/// Runs `floqnet <subcommand> [flags]`. Returns 0 on success, 1 on a
/// numerical failure (or a failed verify check), 2 on invalid input. Results
/// go to files and `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace floqnet::cli
