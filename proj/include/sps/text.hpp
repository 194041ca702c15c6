#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

#include "sps/error.hpp"

namespace sps {

// Shortest round-trip decimal form.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(long long v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_uint(std::uint64_t v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace detail {

template <typename T>
inline T parse_number(const std::string& s, const std::string& what) {
    T value{};
    const char* first = s.data();
    const char* last = s.data() + s.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last)
        throw config_error(what + ": cannot parse '" + s + "'");
    return value;
}

} // namespace detail

inline long long parse_int(const std::string& s, const std::string& what) {
    return detail::parse_number<long long>(s, what);
}

inline std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    return detail::parse_number<std::uint64_t>(s, what);
}

inline double parse_double(const std::string& s, const std::string& what) {
    return detail::parse_number<double>(s, what);
}

} // namespace sps
