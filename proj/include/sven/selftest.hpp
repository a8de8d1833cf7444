#pragma once

#include <iosfwd>

namespace sven {

/// Quick numerical sanity checks of the core routines (a few seconds).
/// Prints one line per check and returns true when all pass.
bool run_selftest(std::ostream& out);

}  // namespace sven
