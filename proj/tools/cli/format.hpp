#pragma once

#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <system_error>

namespace nonmarkov::cli {

/// Shortest round-trip decimal form; locale-independent.
inline std::string format_double(double x) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

template <class T>
std::string join(std::span<const T> xs, const char* sep = ",") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(xs[i]);
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

}  // namespace nonmarkov::cli
