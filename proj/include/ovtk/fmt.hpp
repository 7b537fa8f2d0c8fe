#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <system_error>

namespace ovtk {

/// Shortest round-trip decimal form of a double (locale-independent).
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Fixed-width scientific form for human-facing tables.
inline std::string format_sci(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*e", digits, v);
    return std::string(buf);
}

}  // namespace ovtk
