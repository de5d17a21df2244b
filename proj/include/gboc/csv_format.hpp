#pragma once

#include <charconv>
#include <string>

namespace gboc {

// Shortest-safe text form for CSV output: 17 significant digits.
inline std::string format_real(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace gboc
