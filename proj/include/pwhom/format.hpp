#ifndef PWHOM_FORMAT_HPP
#define PWHOM_FORMAT_HPP

#include <charconv>
#include <string>

namespace pwh {

// Locale-independent float formatting, 17 significant digits.
inline std::string fmt17(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

}  // namespace pwh

#endif
