#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace peergrade {

inline constexpr const char* kToolVersion = "1.0.0";

/// Runs one `peergrade` command line (arguments after the program name).
/// Returns 0 on success, 2 on input, schema or flag errors, 1 on internal errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace peergrade
