#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace pancake::detail {

// Shortest text that reads back to the same double.
inline std::string shortest(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace pancake::detail
