#pragma once

#include <iosfwd>

namespace thoughtmem {

// Entry point behind the command-line tool. Returns 0 on success, 1 on
// usage errors, 2 on runtime errors (rendered to `err` with the error
// name).
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace thoughtmem
