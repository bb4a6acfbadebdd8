#pragma once

#include <iosfwd>

namespace devquad {

// Exit status: 0 success, 2 constraints unreachable (report still written),
// 1 errors and usage problems.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace devquad
