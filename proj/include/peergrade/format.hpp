#pragma once

#include <string>

namespace peergrade {

/// Shortest decimal text that parses back to the same double; "nan", "inf"
/// and "-inf" for non-finite values.
[[nodiscard]] std::string format_double(double value);

} // namespace peergrade
