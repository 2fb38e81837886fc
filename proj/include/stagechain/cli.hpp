#pragma once

#include <ostream>

namespace stagechain::cli {

// Runs the command-line tool.  Returns the process exit code: 0 on success,
// 2 on usage/configuration errors, 3 on numerical failures.  Streams are
// injected so tests can capture output.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace stagechain::cli
