#pragma once

// Cleaning of raw narrative text and extraction of the (context, talk) dialogue corpus.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "narrative_net/error.hpp"
#include "narrative_net/text_util.hpp"
#include "narrative_net/utf8.hpp"

namespace narrative_net {

struct RawText {
  std::string content;
  std::string source_id;
};

/// Validates the invariants of a RawText (nonempty id, valid UTF-8).
inline void validate(const RawText& raw) {
  if (raw.source_id.empty()) throw DataError("raw text has an empty source_id");
  if (!utf8::is_valid(raw.content)) throw DataError(raw.source_id + ": content is not valid UTF-8");
}

enum class CleaningAction { delete_line, delete_match, join_hyphen_break };

struct CleaningRule {
  std::string pattern;
  CleaningAction action = CleaningAction::delete_line;
  std::string description;
};

inline std::string to_string(CleaningAction a) {
  switch (a) {
    case CleaningAction::delete_line: return "delete-line";
    case CleaningAction::delete_match: return "delete-match";
    case CleaningAction::join_hyphen_break: return "join-hyphen-break";
  }
  return "delete-line";
}

inline CleaningAction parse_cleaning_action(std::string_view s) {
  if (s == "delete-line") return CleaningAction::delete_line;
  if (s == "delete-match") return CleaningAction::delete_match;
  if (s == "join-hyphen-break") return CleaningAction::join_hyphen_break;
  throw DataError("unknown cleaning action '" + std::string(s) + "'");
}

/// Rules shipped with the toolkit: numbered notes, all-caps running headers, hyphenated breaks.
inline std::vector<CleaningRule> default_cleaning_rules() {
  return {
      {R"(^\s*\d+\.\s)", CleaningAction::delete_line, "numbered note lines"},
      {R"(^(?!CHAPTER\b)[A-Z][A-Z0-9 .,;:'-]{2,59}$)", CleaningAction::delete_line,
       "page headers (short all-caps lines)"},
      {R"(([A-Za-z])-(?:[ \t]*\r?\n[ \t]*|[ ])([a-z]))", CleaningAction::join_hyphen_break,
       "words broken by a hyphen and a line break or space"},
  };
}

inline void to_json(nlohmann::json& j, const CleaningRule& r) {
  j = nlohmann::json{{"pattern", r.pattern}, {"action", to_string(r.action)}, {"description", r.description}};
}

inline void from_json(const nlohmann::json& j, CleaningRule& r) {
  r.pattern = j.at("pattern").get<std::string>();
  r.action = parse_cleaning_action(j.at("action").get<std::string>());
  r.description = j.value("description", std::string{});
}

inline std::vector<CleaningRule> parse_cleaning_rules(std::string_view json_text) {
  try {
    return nlohmann::json::parse(json_text).get<std::vector<CleaningRule>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid cleaning rules: ") + e.what());
  }
}

namespace detail {

struct CompiledRule {
  std::regex re;
  CleaningAction action;
};

inline std::vector<CompiledRule> compile_rules(const std::vector<CleaningRule>& rules) {
  std::vector<CompiledRule> out;
  out.reserve(rules.size());
  for (std::size_t i = 0; i < rules.size(); ++i) {
    try {
      out.push_back({std::regex(rules[i].pattern, std::regex::ECMAScript), rules[i].action});
    } catch (const std::regex_error& e) {
      throw RuleCompileError(i, e.what());
    }
  }
  return out;
}

inline std::string_view strip_cr(std::string_view line) {
  return (!line.empty() && line.back() == '\r') ? line.substr(0, line.size() - 1) : line;
}

// Line-oriented rules see one line at a time (without '\n'), so ^ and $ anchor per line.
inline std::string apply_line_rule(const std::string& text, const CompiledRule& rule) {
  std::string out;
  out.reserve(text.size());
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    const bool has_nl = nl != std::string::npos;
    if (!has_nl) nl = text.size();
    const std::string_view full(text.data() + start, nl - start);
    const std::string line(strip_cr(full));
    if (rule.action == CleaningAction::delete_line) {
      if (!std::regex_search(line, rule.re)) {
        out.append(full);
        if (has_nl) out.push_back('\n');
      }
    } else {
      out += std::regex_replace(line, rule.re, "");
      out.append(full.substr(line.size()));  // keep a trailing '\r'
      if (has_nl) out.push_back('\n');
    }
    start = nl + 1;
  }
  return out;
}

inline std::string apply_rule(const std::string& text, const CompiledRule& rule) {
  if (rule.action == CleaningAction::join_hyphen_break) return std::regex_replace(text, rule.re, "$1$2");
  return apply_line_rule(text, rule);
}

}  // namespace detail

/// Applies `rules` in list order, repeating whole passes until the text stops changing.
/// Every action only removes bytes, so the result is a fixed point: clean_text is idempotent.
inline std::string clean_text(const RawText& raw, const std::vector<CleaningRule>& rules) {
  const auto compiled = detail::compile_rules(rules);
  std::string text = raw.content;
  constexpr int kMaxPasses = 64;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    std::string next = text;
    for (const auto& rule : compiled) next = detail::apply_rule(next, rule);
    if (next == text) break;
    text = std::move(next);
  }
  return text;
}

struct QuotePair {
  std::string open;
  std::string close;
};

struct QuoteStyle {
  std::vector<QuotePair> pairs{{"“", "”"}};

  static QuoteStyle curly() { return {}; }
  static QuoteStyle straight() { return QuoteStyle{{{"\"", "\""}}}; }
  static QuoteStyle curly_and_straight() { return QuoteStyle{{{"“", "”"}, {"\"", "\""}}}; }
};

struct ExtractOptions {
  QuoteStyle quote_style;
  std::string chapter_pattern = R"(^CHAPTER\b)";
  bool chapter_pattern_icase = true;
  /// Maximum code points of narration kept on each side of a talk.
  std::size_t context_cap = 300;
};

/// One dialogue occurrence. `talk_at` is the byte offset inside `context` where the talk sat:
/// context[0, talk_at) is narration before the quote and context[talk_at, end) narration after.
struct CorpusItem {
  std::int64_t id = 0;
  std::string context;
  std::string talk;
  int chapter = 1;
  std::size_t char_offset = 0;
  std::size_t talk_at = 0;
  bool unbalanced = false;

  std::string_view before() const { return std::string_view(context).substr(0, talk_at); }
  std::string_view after() const { return std::string_view(context).substr(talk_at); }
  bool operator==(const CorpusItem&) const = default;
};

inline nlohmann::ordered_json to_ordered_json(const CorpusItem& item) {
  nlohmann::ordered_json j;
  j["id"] = item.id;
  j["context"] = item.context;
  j["talk"] = item.talk;
  j["chapter"] = item.chapter;
  j["char_offset"] = item.char_offset;
  j["talk_at"] = item.talk_at;
  if (item.unbalanced) j["unbalanced"] = true;
  return j;
}

inline CorpusItem corpus_item_from_json(const nlohmann::json& j) {
  CorpusItem item;
  item.id = j.at("id").get<std::int64_t>();
  item.context = j.at("context").get<std::string>();
  item.talk = j.at("talk").get<std::string>();
  item.chapter = j.at("chapter").get<int>();
  item.char_offset = j.at("char_offset").get<std::size_t>();
  item.talk_at = j.value("talk_at", item.context.size());
  item.unbalanced = j.value("unbalanced", false);
  if (item.talk_at > item.context.size()) throw DataError("talk_at beyond context length");
  return item;
}

inline std::string corpus_to_jsonl(const std::vector<CorpusItem>& items) {
  std::string out;
  for (const auto& item : items) {
    out += to_ordered_json(item).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<CorpusItem> corpus_from_jsonl(std::string_view text, const std::string& origin = "corpus") {
  std::vector<CorpusItem> items;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      items.push_back(corpus_item_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (items.size() > 1 && items.back().id <= items[items.size() - 2].id)
      throw DataError(origin + ":" + std::to_string(line_no) + ": item ids not strictly increasing");
  }
  return items;
}

namespace detail {

struct QuoteSpan {
  std::size_t open = 0;           // offset of the opening glyph
  std::size_t content_begin = 0;  // first byte of talk
  std::size_t content_end = 0;    // one past the last byte of talk
  std::size_t close_end = 0;      // one past the closing glyph, or the truncation point when unbalanced
  bool unbalanced = false;
};

// Offsets of blank-line paragraph breaks as [begin, end) runs of whitespace holding >= 2 newlines.
struct ParagraphIndex {
  std::vector<std::pair<std::size_t, std::size_t>> breaks;
  std::size_t size = 0;

  explicit ParagraphIndex(std::string_view text) : size(text.size()) {
    std::size_t i = 0;
    while (i < text.size()) {
      if (text[i] != '\n') {
        ++i;
        continue;
      }
      std::size_t j = i;
      int newlines = 0;
      while (j < text.size() && (text[j] == '\n' || text[j] == '\r' || text[j] == ' ' || text[j] == '\t')) {
        if (text[j] == '\n') ++newlines;
        ++j;
      }
      if (newlines >= 2) {
        // Trailing spaces after the last newline belong to the next paragraph's indentation.
        breaks.emplace_back(i, j);
      }
      i = j;
    }
  }

  std::size_t paragraph_begin(std::size_t pos) const {
    std::size_t begin = 0;
    for (const auto& [b, e] : breaks) {
      if (e > pos) break;
      begin = e;
    }
    return begin;
  }

  std::size_t paragraph_end(std::size_t pos) const {
    for (const auto& [b, e] : breaks)
      if (b >= pos) return b;
    return size;
  }

  bool is_break_start(std::size_t pos) const {
    auto it = std::lower_bound(breaks.begin(), breaks.end(), std::make_pair(pos, std::size_t{0}));
    return it != breaks.end() && it->first == pos;
  }
};

inline bool starts_with_at(std::string_view text, std::size_t pos, std::string_view glyph) {
  return !glyph.empty() && text.substr(pos, glyph.size()) == glyph;
}

inline std::vector<QuoteSpan> scan_quotes(std::string_view text, const QuoteStyle& style,
                                          const ParagraphIndex& paragraphs) {
  std::vector<QuoteSpan> spans;
  std::size_t i = 0;
  while (i < text.size()) {
    const QuotePair* pair = nullptr;
    for (const auto& p : style.pairs)
      if (starts_with_at(text, i, p.open) && (!pair || p.open.size() > pair->open.size())) pair = &p;
    if (!pair) {
      ++i;
      continue;
    }
    QuoteSpan span;
    span.open = i;
    span.content_begin = i + pair->open.size();
    const bool symmetric = pair->open == pair->close;
    int depth = 1;
    std::size_t j = span.content_begin;
    bool closed = false;
    while (j < text.size()) {
      if (paragraphs.is_break_start(j)) break;
      if (!symmetric && starts_with_at(text, j, pair->open)) {
        ++depth;
        j += pair->open.size();
        continue;
      }
      if (starts_with_at(text, j, pair->close)) {
        if (--depth == 0) {
          span.content_end = j;
          span.close_end = j + pair->close.size();
          closed = true;
          break;
        }
        j += pair->close.size();
        continue;
      }
      ++j;
    }
    if (!closed) {
      std::size_t e = j;
      while (e > span.content_begin && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
      span.content_end = e;
      span.close_end = j;
      span.unbalanced = true;
    }
    if (!is_blank(text.substr(span.content_begin, span.content_end - span.content_begin))) spans.push_back(span);
    i = std::max(span.close_end, span.content_begin);
  }
  return spans;
}

struct ChapterIndex {
  std::vector<std::size_t> heading_starts;
  std::vector<std::size_t> heading_ends;
  std::size_t size = 0;

  ChapterIndex(std::string_view text, const ExtractOptions& opts) : size(text.size()) {
    auto flags = std::regex::ECMAScript;
    if (opts.chapter_pattern_icase) flags |= std::regex::icase;
    std::regex re;
    try {
      re = std::regex(opts.chapter_pattern, flags);
    } catch (const std::regex_error& e) {
      throw ConfigError("chapter pattern does not compile: " + std::string(e.what()));
    }
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      const std::string line(strip_cr(text.substr(start, nl - start)));
      if (std::regex_search(line, re)) {
        heading_starts.push_back(start);
        heading_ends.push_back(nl);
      }
      start = nl + 1;
    }
  }

  int chapter_at(std::size_t pos) const {
    const auto n = std::upper_bound(heading_starts.begin(), heading_starts.end(), pos) - heading_starts.begin();
    return std::max<int>(1, static_cast<int>(n));
  }

  // Narration region of the chapter containing `pos`, excluding the heading line itself.
  std::size_t region_begin(std::size_t pos) const {
    std::size_t begin = 0;
    for (std::size_t k = 0; k < heading_starts.size() && heading_starts[k] <= pos; ++k)
      begin = std::min(heading_ends[k], pos);
    return begin;
  }

  std::size_t region_end(std::size_t pos) const {
    for (std::size_t s : heading_starts)
      if (s > pos) return s;
    return size;
  }
};

}  // namespace detail

/// Extracts one CorpusItem per outermost quote pair.
///
/// The context of an item joins the narration before the quote (from the previous talk or the
/// paragraph start) and the narration after it (up to the next talk or the paragraph end), each
/// capped at `context_cap` code points. When both sides are blank, e.g. for a paragraph that
/// consists solely of speech, the after side and then the before side may cross paragraph
/// breaks, never chapter headings. Narration between two talks appears in both contexts.
inline std::vector<CorpusItem> extract_corpus(std::string_view cleaned, const ExtractOptions& opts = {}) {
  const detail::ParagraphIndex paragraphs(cleaned);
  const detail::ChapterIndex chapters(cleaned, opts);
  const auto spans = detail::scan_quotes(cleaned, opts.quote_style, paragraphs);

  std::vector<CorpusItem> items;
  items.reserve(spans.size());
  for (std::size_t k = 0; k < spans.size(); ++k) {
    const auto& s = spans[k];
    const std::size_t prev_end = k == 0 ? 0 : spans[k - 1].close_end;
    const std::size_t next_open = k + 1 < spans.size() ? spans[k + 1].open : cleaned.size();
    const std::size_t para_begin = paragraphs.paragraph_begin(s.open);
    const std::size_t para_end = paragraphs.paragraph_end(s.open);

    std::size_t before_begin = std::max(prev_end, para_begin);
    std::size_t after_end = std::max(s.close_end, std::min(next_open, para_end));
    auto blank = [&](std::size_t b, std::size_t e) { return b >= e || is_blank(cleaned.substr(b, e - b)); };
    if (blank(before_begin, s.open) && blank(s.close_end, after_end)) {
      after_end = std::max(s.close_end, std::min(next_open, chapters.region_end(s.close_end)));
      if (blank(s.close_end, after_end)) {
        after_end = s.close_end;
        before_begin = std::min(s.open, std::max(prev_end, chapters.region_begin(s.open)));
      }
    }
    before_begin = std::max(before_begin, utf8::retreat(cleaned, s.open, opts.context_cap));
    after_end = std::min(after_end, utf8::advance(cleaned, s.close_end, opts.context_cap));

    CorpusItem item;
    item.id = static_cast<std::int64_t>(k);
    const auto before = cleaned.substr(before_begin, s.open - before_begin);
    const auto after = cleaned.substr(s.close_end, after_end - s.close_end);
    item.context.reserve(before.size() + after.size());
    item.context.append(before);
    item.context.append(after);
    item.talk_at = before.size();
    item.talk = std::string(cleaned.substr(s.content_begin, s.content_end - s.content_begin));
    item.chapter = chapters.chapter_at(s.open);
    item.char_offset = s.open;
    item.unbalanced = s.unbalanced;
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace narrative_net
