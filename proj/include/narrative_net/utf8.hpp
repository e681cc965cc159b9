#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace narrative_net::utf8 {

// Byte length of the sequence introduced by lead byte `c`, 0 if `c` is not a lead byte.
inline std::size_t sequence_length(unsigned char c) noexcept {
  if (c < 0x80) return 1;
  if ((c >> 5) == 0x6) return 2;
  if ((c >> 4) == 0xE) return 3;
  if ((c >> 3) == 0x1E) return 4;
  return 0;
}

inline bool is_continuation(unsigned char c) noexcept { return (c & 0xC0) == 0x80; }

inline bool is_valid(std::string_view s) noexcept {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto lead = static_cast<unsigned char>(s[i]);
    const std::size_t len = sequence_length(lead);
    if (len == 0 || i + len > s.size()) return false;
    std::uint32_t cp = len == 1 ? lead : (lead & (0x7F >> len));
    for (std::size_t k = 1; k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if (!is_continuation(c)) return false;
      cp = (cp << 6) | (c & 0x3F);
    }
    // Reject overlong forms, surrogates and out-of-range values.
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
      return false;
    i += len;
  }
  return true;
}

/// Number of code points in `s` (assumes valid UTF-8).
inline std::size_t length(std::string_view s) noexcept {
  std::size_t n = 0;
  for (unsigned char c : s)
    if (!is_continuation(c)) ++n;
  return n;
}

/// Byte offset reached after advancing `count` code points from `from`.
inline std::size_t advance(std::string_view s, std::size_t from, std::size_t count) noexcept {
  std::size_t i = from;
  while (count > 0 && i < s.size()) {
    ++i;
    while (i < s.size() && is_continuation(static_cast<unsigned char>(s[i]))) ++i;
    --count;
  }
  return i;
}

/// Byte offset reached after stepping back `count` code points from `from`.
inline std::size_t retreat(std::string_view s, std::size_t from, std::size_t count) noexcept {
  std::size_t i = from;
  while (count > 0 && i > 0) {
    --i;
    while (i > 0 && is_continuation(static_cast<unsigned char>(s[i]))) --i;
    --count;
  }
  return i;
}

/// Code-point index corresponding to byte offset `byte_offset`.
inline std::size_t codepoint_index(std::string_view s, std::size_t byte_offset) noexcept {
  return length(s.substr(0, byte_offset));
}

inline bool is_boundary(std::string_view s, std::size_t byte_offset) noexcept {
  return byte_offset == 0 || byte_offset >= s.size() ||
         !is_continuation(static_cast<unsigned char>(s[byte_offset]));
}

}  // namespace narrative_net::utf8
