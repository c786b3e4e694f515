#pragma once

#include <charconv>
#include <string>

namespace costot {

// Shortest representation that round-trips exactly; locale independent.
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace costot
