#pragma once

#include <iosfwd>

namespace logheat::cli {

/// Runs one subcommand. Exit codes: 0 success, 2 invalid input or
/// infeasible request, 3 numerical failure, 64 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace logheat::cli
