#pragma once

// Speaker x context augmentation and SQuAD-format export.

#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "narrative_net/error.hpp"
#include "narrative_net/speaker_attribution.hpp"
#include "narrative_net/text_ingest.hpp"
#include "narrative_net/utf8.hpp"

namespace narrative_net {

inline constexpr std::string_view kSpeakerQuestion = "Who is the speaker of the quoted speech?";

struct AugmentationCount {
  std::uint64_t speakers = 0;  // distinct labeled surfaces
  std::uint64_t contexts = 0;
  std::uint64_t records = 0;   // speakers * contexts
};

/// One generated training example. The views stay valid only during the sink call.
struct SquadRecord {
  std::int64_t item_id = 0;
  std::size_t surface_index = 0;
  std::string_view context;
  std::string_view question = kSpeakerQuestion;
  std::string_view answer_text;
  /// Byte offset of the answer in context; -1 for a negative whose surface is absent.
  std::int64_t answer_start = -1;
  bool is_positive = false;
};

/// Pairs every distinct labeled speaker surface with every context and streams the records
/// to `sink`, context-major in corpus order and surfaces in lexicographic order. A record is
/// positive only for the surface its own item is labeled with.
template <typename Sink>
AugmentationCount augment(const std::vector<CorpusItem>& corpus, const std::vector<SpeakerLabel>& labels,
                          Sink&& sink) {
  std::map<std::int64_t, const CorpusItem*> by_id;
  for (const auto& item : corpus) by_id.emplace(item.id, &item);
  std::map<std::int64_t, SpeakerLabel> effective;
  for (const auto& l : labels) {
    if (!by_id.count(l.item_id)) throw DataError("label references unknown item " + std::to_string(l.item_id));
    effective[l.item_id] = l;
  }
  std::set<std::string> surface_set;
  for (const auto& [id, l] : effective) surface_set.insert(l.speaker_surface);
  const std::vector<std::string> surfaces(surface_set.begin(), surface_set.end());

  AugmentationCount count;
  count.speakers = surfaces.size();
  count.contexts = corpus.size();
  for (const auto& item : corpus) {
    auto own = effective.find(item.id);
    for (std::size_t s = 0; s < surfaces.size(); ++s) {
      SquadRecord r;
      r.item_id = item.id;
      r.surface_index = s;
      r.context = item.context;
      r.answer_text = surfaces[s];
      r.is_positive = own != effective.end() && own->second.speaker_surface == surfaces[s];
      if (r.is_positive) {
        r.answer_start = static_cast<std::int64_t>(own->second.start);
      } else {
        const auto hits = find_word_occurrences(item.context, surfaces[s]);
        r.answer_start = hits.empty() ? -1 : static_cast<std::int64_t>(hits.front());
      }
      sink(static_cast<const SquadRecord&>(r));
      ++count.records;
    }
  }
  return count;
}

inline AugmentationCount augment_count(const std::vector<CorpusItem>& corpus, const std::vector<SpeakerLabel>& labels) {
  return augment(corpus, labels, [](const SquadRecord&) {});
}

/// Streams a SQuAD v1.1-shaped document. Consecutive records of one item form a paragraph;
/// negatives are written as questions with an empty answers list.
class SquadWriter {
 public:
  explicit SquadWriter(std::ostream& out, std::string title = "narrative-net") : out_(out), title_(std::move(title)) {
    out_ << R"({"version":"1.1","data":[)";
  }
  SquadWriter(const SquadWriter&) = delete;
  SquadWriter& operator=(const SquadWriter&) = delete;

  void add(const SquadRecord& r) {
    if (!open_paragraph_ || r.item_id != current_item_) {
      close_paragraph();
      if (!open_article_) {
        out_ << R"({"title":)" << nlohmann::json(title_).dump() << R"(,"paragraphs":[)";
        open_article_ = true;
      } else {
        out_ << ',';
      }
      out_ << R"({"context":)" << nlohmann::json(std::string(r.context)).dump() << R"(,"qas":[)";
      open_paragraph_ = true;
      first_qa_ = true;
      current_item_ = r.item_id;
    }
    nlohmann::ordered_json qa;
    qa["question"] = std::string(r.question);
    qa["id"] = std::to_string(r.item_id) + "-" + std::to_string(r.surface_index);
    qa["answers"] = nlohmann::json::array();
    if (r.is_positive) {
      nlohmann::ordered_json ans;
      ans["text"] = std::string(r.answer_text);
      ans["answer_start"] = utf8::codepoint_index(r.context, static_cast<std::size_t>(r.answer_start));
      qa["answers"].push_back(ans);
      ++positives_;
    } else {
      ++negatives_;
    }
    if (!first_qa_) out_ << ',';
    out_ << qa.dump();
    first_qa_ = false;
  }

  void finish() {
    if (finished_) return;
    close_paragraph();
    if (open_article_) out_ << "]}";
    out_ << "]}";
    out_.flush();
    finished_ = true;
  }

  std::uint64_t positives() const noexcept { return positives_; }
  std::uint64_t negatives() const noexcept { return negatives_; }

 private:
  void close_paragraph() {
    if (open_paragraph_) out_ << "]}";
    open_paragraph_ = false;
  }

  std::ostream& out_;
  std::string title_;
  bool open_article_ = false;
  bool open_paragraph_ = false;
  bool first_qa_ = true;
  bool finished_ = false;
  std::int64_t current_item_ = -1;
  std::uint64_t positives_ = 0;
  std::uint64_t negatives_ = 0;
};

inline std::string export_squad(const std::vector<SquadRecord>& records) {
  std::ostringstream out;
  SquadWriter w(out);
  for (const auto& r : records) w.add(r);
  w.finish();
  return out.str();
}

/// Sidecar metadata describing the negative-example convention of an export.
inline nlohmann::ordered_json squad_manifest(const AugmentationCount& count, std::uint64_t positives,
                                             std::uint64_t negatives) {
  nlohmann::ordered_json j;
  j["format"] = "squad-1.1";
  j["question"] = std::string(kSpeakerQuestion);
  j["negative_convention"] = "empty-answers";
  j["speakers"] = count.speakers;
  j["contexts"] = count.contexts;
  j["records"] = count.records;
  j["positives"] = positives;
  j["negatives"] = negatives;
  return j;
}

/// Writes `<path>` and `<path>.manifest.json`; returns the augmentation count.
inline AugmentationCount export_squad_file(const std::string& path, const std::vector<CorpusItem>& corpus,
                                           const std::vector<SpeakerLabel>& labels) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path, "cannot open for writing");
  SquadWriter writer(out);
  const auto count = augment(corpus, labels, [&](const SquadRecord& r) { writer.add(r); });
  writer.finish();
  if (!out) throw IoError(path, "write failure");
  write_file(path + ".manifest.json", squad_manifest(count, writer.positives(), writer.negatives()).dump(2) + "\n");
  return count;
}

}  // namespace narrative_net
