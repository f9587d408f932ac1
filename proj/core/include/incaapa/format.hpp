#pragma once

#include <charconv>
#include <string>

namespace incaapa {

/// Shortest round-trip decimal representation; locale independent.
inline std::string format_double(double value) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

}  // namespace incaapa
