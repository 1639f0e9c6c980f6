#pragma once

#include <iosfwd>

namespace sva::cli {

/// Entry point shared by the `sva` binary and the CLI tests.
/// Returns 0 on success, 1 on a runtime failure and 2 on a usage error; failures are
/// reported on `err` as a single JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sva::cli
