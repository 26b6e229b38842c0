#ifndef SFMAB_FORMAT_HPP
#define SFMAB_FORMAT_HPP

// Locale-independent, round-trip text for doubles. Used by every file the
// library writes so outputs are byte-stable across runs and platforms.

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "sfmab/errors.hpp"

namespace sfmab {

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline void append_double(std::string& out, double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  out.append(buf, res.ptr);
}

/// Parses the whole of `text` as a double; throws PreconditionError otherwise.
inline double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double x = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), x);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw PreconditionError("not a number: '" + std::string(text) + "'");
  }
  return x;
}

}  // namespace sfmab

#endif  // SFMAB_FORMAT_HPP
