#pragma once

#include <iosfwd>

namespace hcn::app {

/// Entry point of the `hcn` tool. Returns 0 on success, 1 on errors (one line
/// `error: <kind>: <message>` on err) and 2 on usage errors.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace hcn::app
