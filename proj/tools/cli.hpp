#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bctx::cli {

/// Runs the bctx command line. Returns the process exit status: 0 on
/// success, 1 on runtime errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bctx::cli
