#pragma once

#include <string>

namespace gridlight {

/// Shortest round-trip decimal form of a double ("90" for 90.0).
std::string format_number(double v);

std::string format_int(std::int64_t v);

} // namespace gridlight
