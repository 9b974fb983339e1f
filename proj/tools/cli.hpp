#pragma once

#include <iosfwd>

namespace lfdepth::cli {

// Runs one command line; returns the process exit status. Diagnostics go to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lfdepth::cli
