#pragma once

#include <array>
#include <charconv>
#include <string>

namespace emerge {

// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

}  // namespace emerge
