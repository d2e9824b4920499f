#include "gridlight/textutil.hpp"

#include <charconv>
#include <cmath>

namespace gridlight {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string format_int(std::int64_t v) {
    return std::to_string(v);
}

} // namespace gridlight
