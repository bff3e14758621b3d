#pragma once

#include <iosfwd>

namespace slotfill {

/// Runs the command-line interface. Returns the process exit code:
/// 0 on success, 1 on a usage error, 2 on a data error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slotfill
