#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "narrative_net/error.hpp"

namespace narrative_net {

inline bool is_word_byte(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && (std::isalnum(u) || c == '_');
}

inline bool is_blank(std::string_view s) noexcept {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

inline std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Start offsets of `needle` in `hay` that sit on word boundaries at both ends.
inline std::vector<std::size_t> find_word_occurrences(std::string_view hay, std::string_view needle) {
  std::vector<std::size_t> hits;
  if (needle.empty()) return hits;
  for (std::size_t pos = hay.find(needle); pos != std::string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || !is_word_byte(hay[pos - 1]) || !is_word_byte(needle.front());
    const std::size_t end = pos + needle.size();
    const bool right_ok = end >= hay.size() || !is_word_byte(hay[end]) || !is_word_byte(needle.back());
    if (left_ok && right_ok) hits.push_back(pos);
  }
  return hits;
}

inline bool contains_word(std::string_view hay, std::string_view needle) {
  return !find_word_occurrences(hay, needle).empty();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError(path, "read failure");
  return buf.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError(path, "write failure");
}

/// Splits on '\n'; a trailing newline does not produce an empty final element.
inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace narrative_net
