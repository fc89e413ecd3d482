#pragma once

#include <iosfwd>

namespace fiberalign {

// Entry point behind the fiberalign binary, with streams injected so tests
// can drive it. Exit codes: 0 success, 1 runtime failure, 2 usage error.
int cli_main(int argc, const char* const* argv, std::ostream& out,
             std::ostream& err);

}  // namespace fiberalign
