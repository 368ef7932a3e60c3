#pragma once

#include <charconv>
#include <string>

namespace triad {

/// Shortest round-trip decimal form of a double. Used everywhere a number
/// lands in a CSV so that re-running a job reproduces files byte-for-byte.
inline std::string fmt_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace triad
