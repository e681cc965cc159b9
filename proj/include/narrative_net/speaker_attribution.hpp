#pragma once

// Speaker labels, the append-only label log, and the deterministic speaker heuristic.

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "narrative_net/alias_resolution.hpp"
#include "narrative_net/error.hpp"
#include "narrative_net/text_ingest.hpp"
#include "narrative_net/text_util.hpp"

namespace narrative_net {

enum class LabelOrigin { human, heuristic, external_model };

inline std::string to_string(LabelOrigin o) {
  switch (o) {
    case LabelOrigin::human: return "human";
    case LabelOrigin::heuristic: return "heuristic";
    case LabelOrigin::external_model: return "external-model";
  }
  return "human";
}

inline LabelOrigin parse_label_origin(std::string_view s) {
  if (s == "human") return LabelOrigin::human;
  if (s == "heuristic") return LabelOrigin::heuristic;
  if (s == "external-model") return LabelOrigin::external_model;
  throw DataError("unknown label origin '" + std::string(s) + "'");
}

struct SpeakerLabel {
  std::int64_t item_id = 0;
  std::string speaker_surface;
  std::size_t start = 0;  // byte offsets into the item's context
  std::size_t end = 0;
  LabelOrigin origin = LabelOrigin::human;
  double confidence = 1.0;

  bool operator==(const SpeakerLabel&) const = default;
};

/// One decision in the label log; a missing label means the item was skipped.
struct LabelEntry {
  std::int64_t item_id = 0;
  std::optional<SpeakerLabel> label;

  bool skipped() const noexcept { return !label.has_value(); }
  bool operator==(const LabelEntry&) const = default;
};

inline nlohmann::ordered_json to_ordered_json(const LabelEntry& e) {
  nlohmann::ordered_json j;
  j["item_id"] = e.item_id;
  if (!e.label) {
    j["skip"] = true;
    return j;
  }
  j["surface"] = e.label->speaker_surface;
  j["start"] = e.label->start;
  j["end"] = e.label->end;
  j["origin"] = to_string(e.label->origin);
  j["confidence"] = e.label->confidence;
  return j;
}

inline LabelEntry label_entry_from_json(const nlohmann::json& j) {
  LabelEntry e;
  e.item_id = j.at("item_id").get<std::int64_t>();
  if (j.value("skip", false)) return e;
  SpeakerLabel l;
  l.item_id = e.item_id;
  l.speaker_surface = j.at("surface").get<std::string>();
  l.start = j.at("start").get<std::size_t>();
  l.end = j.at("end").get<std::size_t>();
  l.origin = parse_label_origin(j.value("origin", std::string("human")));
  l.confidence = j.value("confidence", 1.0);
  e.label = std::move(l);
  return e;
}

/// Throws DataError when the label does not describe a substring of `item.context`.
inline void validate_label(const SpeakerLabel& label, const CorpusItem& item) {
  const std::string where = "label for item " + std::to_string(label.item_id);
  if (label.item_id != item.id) throw DataError(where + ": item id mismatch");
  if (label.start > label.end)
    throw DataError(where + ": span order error (" + std::to_string(label.start) + ", " +
                    std::to_string(label.end) + ")");
  if (label.end > item.context.size()) throw DataError(where + ": span out of bounds");
  if (std::string_view(item.context).substr(label.start, label.end - label.start) != label.speaker_surface)
    throw DataError(where + ": context[start, end) does not equal the surface");
  if (!(label.confidence >= 0.0 && label.confidence <= 1.0)) throw DataError(where + ": confidence outside [0, 1]");
}

/// Effective decision per item: later entries supersede earlier ones.
inline std::map<std::int64_t, LabelEntry> current_decisions(const std::vector<LabelEntry>& log) {
  std::map<std::int64_t, LabelEntry> state;
  for (const auto& e : log) state[e.item_id] = e;
  return state;
}

/// Effective labels (skips dropped) in item order.
inline std::vector<SpeakerLabel> current_labels(const std::vector<LabelEntry>& log) {
  std::vector<SpeakerLabel> out;
  for (const auto& [id, e] : current_decisions(log))
    if (e.label) out.push_back(*e.label);
  return out;
}

struct LogReplay {
  std::vector<LabelEntry> entries;
  std::size_t valid_bytes = 0;  // prefix holding only complete lines
  bool torn_tail = false;       // final line lacked its newline (interrupted write)
};

/// Parses a label log. A final line without '\n' is an interrupted append and is ignored; any
/// other malformed line raises LogCorruptError with its 1-based line number.
inline LogReplay replay_label_log(std::string_view text, const std::string& path = "labels") {
  LogReplay r;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    ++line_no;
    if (nl == std::string_view::npos) {
      r.torn_tail = true;
      break;
    }
    const auto line = text.substr(start, nl - start);
    if (!is_blank(line)) {
      try {
        r.entries.push_back(label_entry_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        throw LogCorruptError(path, line_no, e.what());
      }
    }
    start = nl + 1;
    r.valid_bytes = start;
  }
  return r;
}

/// Append-only JSON Lines label store bound to a corpus. Each append is a single write(2) of
/// whole lines followed by fsync, so a decision is either fully present or absent after a crash.
/// An empty path keeps the log in memory.
class LabelStore {
 public:
  LabelStore(std::string path, const std::vector<CorpusItem>& corpus) : path_(std::move(path)) {
    for (const auto& item : corpus) items_.emplace(item.id, &item);
    if (path_.empty() || ::access(path_.c_str(), F_OK) != 0) return;
    const std::string text = read_file(path_);
    auto replay = replay_label_log(text, path_);
    if (replay.torn_tail && ::truncate(path_.c_str(), static_cast<off_t>(replay.valid_bytes)) != 0)
      throw IoError(path_, std::string("cannot drop interrupted last line: ") + std::strerror(errno));
    std::size_t line_no = 0;
    for (const auto& e : replay.entries) {
      ++line_no;
      if (!items_.count(e.item_id))
        throw LogCorruptError(path_, line_no, "unknown item id " + std::to_string(e.item_id));
    }
    log_ = std::move(replay.entries);
  }

  const std::string& path() const noexcept { return path_; }

  void put(const SpeakerLabel& label) { append({LabelEntry{label.item_id, label}}); }

  void put_skip(std::int64_t item_id) { append({LabelEntry{item_id, std::nullopt}}); }

  /// Validates every label first; nothing is written unless all are valid.
  void put_batch(const std::vector<SpeakerLabel>& labels) {
    std::vector<LabelEntry> entries;
    entries.reserve(labels.size());
    for (const auto& l : labels) entries.push_back({l.item_id, l});
    append(entries);
  }

  std::vector<LabelEntry> log() const {
    std::lock_guard lock(mu_);
    return log_;
  }

  std::map<std::int64_t, LabelEntry> current() const { return current_decisions(log()); }

  std::optional<SpeakerLabel> get(std::int64_t item_id) const {
    const auto state = current();
    auto it = state.find(item_id);
    if (it == state.end()) return std::nullopt;
    return it->second.label;
  }

 private:
  void append(const std::vector<LabelEntry>& entries) {
    std::string payload;
    for (const auto& e : entries) {
      auto it = items_.find(e.item_id);
      if (it == items_.end()) throw DataError("unknown item_id " + std::to_string(e.item_id));
      if (e.label) validate_label(*e.label, *it->second);
      payload += to_ordered_json(e).dump();
      payload += '\n';
    }
    std::lock_guard lock(mu_);
    if (!path_.empty()) write_all(payload);
    log_.insert(log_.end(), entries.begin(), entries.end());
  }

  void write_all(std::string_view payload) {
    const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0) throw IoError(path_, std::strerror(errno));
    std::size_t done = 0;
    while (done < payload.size()) {
      const ssize_t n = ::write(fd, payload.data() + done, payload.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        const int err = errno;
        ::close(fd);
        throw IoError(path_, std::strerror(err));
      }
      done += static_cast<std::size_t>(n);
    }
    ::fsync(fd);
    ::close(fd);
  }

  std::string path_;
  std::unordered_map<std::int64_t, const CorpusItem*> items_;
  std::vector<LabelEntry> log_;
  mutable std::mutex mu_;
};

inline std::string labels_to_jsonl(const std::vector<LabelEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += to_ordered_json(e).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<std::string> default_speech_verbs() {
  return {"said",    "says",     "say",     "cried",    "replied",  "asked",     "answered", "shouted",
          "exclaimed", "whispered", "muttered", "called", "continued", "added",   "declared", "demanded",
          "retorted", "remarked", "responded", "sighed",  "laughed",  "spoke",     "began",    "urged"};
}

struct AttributionConfig {
  std::vector<std::string> speech_verbs = default_speech_verbs();
  double verb_adjacent_confidence = 0.9;
  double plain_confidence = 0.5;
};

/// A registry surface occurring in an item's context.
struct Candidate {
  std::string surface;
  std::size_t start = 0;
  std::size_t end = 0;
  bool before_talk = true;
  bool verb_adjacent = false;
  std::size_t distance = 0;  // bytes between the occurrence and the talk position
};

namespace detail {

inline std::string word_after(std::string_view s, std::size_t pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  std::size_t e = pos;
  while (e < s.size() && std::isalpha(static_cast<unsigned char>(s[e]))) ++e;
  return to_lower_ascii(s.substr(pos, e - pos));
}

inline std::string word_before(std::string_view s, std::size_t pos) {
  while (pos > 0 && std::isspace(static_cast<unsigned char>(s[pos - 1]))) --pos;
  std::size_t b = pos;
  while (b > 0 && std::isalpha(static_cast<unsigned char>(s[b - 1]))) --b;
  return to_lower_ascii(s.substr(b, pos - b));
}

}  // namespace detail

/// All surface occurrences in the context, best first.
///
/// Occurrences nested inside a longer occurrence are dropped. Ranking: adjacency to a speech
/// verb, then distance to the talk, then the side before the talk, then smaller offset.
inline std::vector<Candidate> rank_candidates(const CorpusItem& item, const CharacterRegistry& registry,
                                              const AttributionConfig& config = {}) {
  const std::string_view ctx = item.context;
  std::set<std::string> verbs;
  for (const auto& v : config.speech_verbs) verbs.insert(to_lower_ascii(v));

  std::vector<Candidate> all;
  for (const auto& surface : registry.all_surfaces()) {
    for (std::size_t pos : find_word_occurrences(ctx, surface)) {
      Candidate c;
      c.surface = surface;
      c.start = pos;
      c.end = pos + surface.size();
      c.before_talk = c.end <= item.talk_at;
      c.distance = c.before_talk ? item.talk_at - c.end : (c.start >= item.talk_at ? c.start - item.talk_at : 0);
      c.verb_adjacent = verbs.count(detail::word_after(ctx, c.end)) || verbs.count(detail::word_before(ctx, c.start));
      all.push_back(std::move(c));
    }
  }
  std::vector<Candidate> kept;
  for (const auto& c : all) {
    const bool nested = std::any_of(all.begin(), all.end(), [&](const Candidate& o) {
      return o.start <= c.start && o.end >= c.end && (o.end - o.start) > (c.end - c.start);
    });
    if (!nested) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
    return std::make_tuple(!a.verb_adjacent, a.distance, !a.before_talk, a.start, a.surface) <
           std::make_tuple(!b.verb_adjacent, b.distance, !b.before_talk, b.start, b.surface);
  });
  return kept;
}

inline std::optional<SpeakerLabel> heuristic_attribute(const CorpusItem& item, const CharacterRegistry& registry,
                                                       const AttributionConfig& config = {}) {
  const auto ranked = rank_candidates(item, registry, config);
  if (ranked.empty()) return std::nullopt;
  const auto& best = ranked.front();
  return SpeakerLabel{item.id,
                      best.surface,
                      best.start,
                      best.end,
                      LabelOrigin::heuristic,
                      best.verb_adjacent ? config.verb_adjacent_confidence : config.plain_confidence};
}

/// Labels whose confidence is below `threshold`, for manual review.
inline std::vector<SpeakerLabel> low_confidence(const std::vector<SpeakerLabel>& labels, double threshold) {
  std::vector<SpeakerLabel> out;
  std::copy_if(labels.begin(), labels.end(), std::back_inserter(out),
               [&](const SpeakerLabel& l) { return l.confidence < threshold; });
  return out;
}

}  // namespace narrative_net
