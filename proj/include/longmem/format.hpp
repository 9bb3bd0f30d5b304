#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace longmem {

/// Shortest decimal text that reads back to the same double. Locale-free.
inline std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, result.ptr);
}

/// Fixed-point rendering with `digits` decimals. Locale-free.
inline std::string format_fixed(double value, int digits) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::fixed, digits);
  std::string text(buffer, result.ptr);
  if (text == "-0." + std::string(static_cast<std::size_t>(digits), '0')) text.erase(0, 1);
  return text;
}

}  // namespace longmem
