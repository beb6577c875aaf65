#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace chemdist {

// Shortest round-trip decimal form; identical across runs for identical bits.
inline std::string fmt_num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

}  // namespace chemdist
