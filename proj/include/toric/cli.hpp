#pragma once

#include <iosfwd>

namespace toric {

// Batch front end. Exit status: 0 success, 1 domain or parse error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace toric
