#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dsopt {

/// Shortest decimal form that round-trips exactly; locale independent.
std::string format_real(double x);

/// Strict, locale-independent parse of the whole token. Throws std::invalid_argument.
double parse_real(std::string_view token);
std::int64_t parse_int(std::string_view token);
std::uint64_t parse_uint(std::string_view token);

std::vector<std::string_view> split_whitespace(std::string_view line);
std::string_view trim(std::string_view s);

/// 64-bit FNV-1a, rendered as 16 hex digits. Used for config provenance.
std::string fnv1a_hex(std::string_view data);

}  // namespace dsopt
