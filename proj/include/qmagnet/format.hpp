#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <system_error>

namespace qmagnet {

// Locale-independent float formatting, 15 significant digits (round-trips a
// double and satisfies the ">= 12 significant digits" CSV contract).
inline std::string fmt_double(double value, int precision = 15) {
    if (value == 0.0) value = 0.0;  // drop the sign of negative zero
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                   std::chars_format::general, precision);
    return std::string(buf, ptr);
}

inline std::string fmt_int(long long value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

inline bool parse_double(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

inline bool parse_int(std::string_view text, long long& out) {
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace qmagnet
