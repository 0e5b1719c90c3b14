#pragma once

#include <iosfwd>

namespace dlab::cli {

enum ExitCode : int { kOk = 0, kVerdictFail = 1, kConfigError = 2, kNumericalFailure = 3 };

// Entry point of the dlab tool. argv[0] is the program name; commands are
// evolve, sweep, diagnostics and exponents.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dlab::cli
