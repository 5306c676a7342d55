#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <system_error>

#include "factorscope/errors.hpp"

namespace factorscope {

// All numeric file output goes through this: 17 significant digits round-trip
// every IEEE double exactly, and to_chars is locale-independent by contract.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Strict locale-independent parse of a full token; rejects partial matches,
// empty fields, and non-finite spellings produce their IEEE values (callers
// that require finiteness check afterwards).
inline bool try_parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last;
}

}  // namespace factorscope
