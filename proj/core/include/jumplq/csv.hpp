#pragma once

#include <charconv>
#include <string>

namespace jumplq {

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

}  // namespace jumplq
