#pragma once

// Evaluative-word collection and lexicon sentiment scoring.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "narrative_net/alias_resolution.hpp"
#include "narrative_net/error.hpp"
#include "narrative_net/social_graph.hpp"
#include "narrative_net/text_ingest.hpp"
#include "narrative_net/text_util.hpp"

namespace narrative_net {

// ---------------------------------------------------------------------------------------------
// Lexicon

struct Polarity {
  double positive = 0.0;
  double negative = 0.0;
};

enum class SenseAggregation { mean, first_sense };

/// SentiWordNet 3.0 layout: POS \t ID \t PosScore \t NegScore \t SynsetTerms \t Gloss,
/// with '#' comment lines. Satellite adjectives ('s') are folded into 'a'.
class SentimentLexicon {
 public:
  struct Sense {
    int rank = 1;
    Polarity polarity;
  };

  static SentimentLexicon parse(std::string_view text, const std::string& origin = "lexicon") {
    SentimentLexicon lex;
    std::size_t line_no = 0;
    for (auto raw : split_lines(text)) {
      ++line_no;
      std::string_view line = raw;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty() || line.front() == '#') continue;
      std::vector<std::string_view> f;
      std::size_t start = 0;
      while (true) {
        const auto tab = line.find('\t', start);
        f.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
        if (tab == std::string_view::npos) break;
        start = tab + 1;
      }
      const std::string where = origin + ":" + std::to_string(line_no);
      if (f.size() != 6) throw DataError(where + ": expected 6 tab-separated fields, got " + std::to_string(f.size()));
      if (f[0].size() != 1 || std::string_view("anvrs").find(f[0][0]) == std::string_view::npos)
        throw DataError(where + ": unknown POS '" + std::string(f[0]) + "'");
      const char pos = f[0][0] == 's' ? 'a' : f[0][0];
      Polarity p;
      try {
        p.positive = std::stod(std::string(f[2]));
        p.negative = std::stod(std::string(f[3]));
      } catch (const std::logic_error&) {
        throw DataError(where + ": scores are not numbers");
      }
      if (p.positive < 0.0 || p.positive > 1.0 || p.negative < 0.0 || p.negative > 1.0)
        throw DataError(where + ": scores outside [0, 1]");
      std::size_t t = 0;
      const std::string_view terms = f[4];
      while (t < terms.size()) {
        auto sp = terms.find(' ', t);
        if (sp == std::string_view::npos) sp = terms.size();
        const auto term = terms.substr(t, sp - t);
        t = sp + 1;
        if (term.empty()) continue;
        const auto hash = term.rfind('#');
        if (hash == std::string_view::npos || hash == 0) throw DataError(where + ": malformed term '" + std::string(term) + "'");
        int rank = 1;
        try {
          rank = std::stoi(std::string(term.substr(hash + 1)));
        } catch (const std::logic_error&) {
          throw DataError(where + ": malformed sense number in '" + std::string(term) + "'");
        }
        lex.senses_[{to_lower_ascii(term.substr(0, hash)), pos}].push_back({rank, p});
      }
    }
    return lex;
  }

  static SentimentLexicon load(const std::string& path) { return parse(read_file(path), path); }

  /// Adds one sense directly (tests and programmatic lexicons).
  void add(std::string lemma, char pos, Polarity p, int rank = 1) {
    if (p.positive < 0.0 || p.positive > 1.0 || p.negative < 0.0 || p.negative > 1.0)
      throw DataError("lexicon scores outside [0, 1]");
    senses_[{to_lower_ascii(lemma), pos == 's' ? 'a' : pos}].push_back({rank, p});
  }

  /// Case-insensitive lookup; `mean` averages every sense, `first_sense` takes the lowest rank.
  std::optional<Polarity> lookup(std::string_view lemma, char pos = 'a',
                                 SenseAggregation agg = SenseAggregation::mean) const {
    auto it = senses_.find({to_lower_ascii(lemma), pos == 's' ? 'a' : pos});
    if (it == senses_.end() || it->second.empty()) return std::nullopt;
    const auto& senses = it->second;
    if (agg == SenseAggregation::first_sense) {
      const auto best = std::min_element(senses.begin(), senses.end(),
                                         [](const Sense& a, const Sense& b) { return a.rank < b.rank; });
      return best->polarity;
    }
    Polarity sum;
    for (const auto& s : senses) {
      sum.positive += s.polarity.positive;
      sum.negative += s.polarity.negative;
    }
    const double n = static_cast<double>(senses.size());
    return Polarity{sum.positive / n, sum.negative / n};
  }

  std::size_t size() const noexcept { return senses_.size(); }

 private:
  std::map<std::pair<std::string, char>, std::vector<Sense>> senses_;
};

// ---------------------------------------------------------------------------------------------
// Tagging

struct TaggedToken {
  std::string text;   // lowercase
  std::string tag;    // JJ, JJR, JJS, or XX for anything else
  std::string lemma;  // base form for adjectives, the text otherwise
};

inline bool is_adjective_tag(std::string_view tag) { return tag == "JJ" || tag == "JJR" || tag == "JJS"; }

/// Lowercased word tokens: ASCII letters with inner apostrophes and hyphens.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    while (!cur.empty() && (cur.back() == '\'' || cur.back() == '-')) cur.pop_back();
    if (!cur.empty()) out.push_back(cur);
    cur.clear();
  };
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::isalpha(u)) {
      cur += static_cast<char>(std::tolower(u));
    } else if ((c == '\'' || c == '-') && !cur.empty()) {
      cur += c;
    } else {
      flush();
    }
  }
  flush();
  return out;
}

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::vector<TaggedToken> tag(std::string_view text) = 0;
};

inline std::vector<std::string> default_adjectives() {
  return {
      "able", "absurd", "active", "afraid", "aged", "agreeable", "alert", "alive", "ambitious", "ancient",
      "angry", "anxious", "arrogant", "ashamed", "awful", "bad", "base", "beautiful", "bitter", "bizarre",
      "bold", "brave", "bright", "brilliant", "brutal", "busy", "callous", "calm", "capable", "careful",
      "careless", "cautious", "cheerful", "clever", "cold", "common", "competent", "confident", "content",
      "corrupt", "courageous", "courteous", "coward", "cowardly", "crafty", "crazy", "cruel", "cunning",
      "curious", "dangerous", "daring", "dark", "dead", "dear", "deceitful", "decent", "deep", "devoted",
      "diligent", "dirty", "disloyal", "dishonest", "distinguished", "drunk", "dull", "eager", "easy", "eloquent",
      "eminent", "evil", "excellent", "faithful", "faithless", "false", "famous", "fearful", "fearless",
      "fierce", "filial", "firm", "foolish", "fortunate", "foul", "frank", "free", "fresh", "friendly",
      "furious", "generous", "gentle", "glad", "glorious", "good", "graceful", "gracious", "grand", "grateful",
      "great", "greedy", "grim", "guilty", "handsome", "happy", "hard", "harsh", "hateful", "haughty",
      "heroic", "high", "honest", "honorable", "honourable", "hopeless", "hostile", "humane", "humble",
      "idle", "ignorant", "ill", "illustrious", "impatient", "important", "incapable", "incompetent",
      "insolent", "intelligent", "jealous", "joyful", "keen", "large", "lazy", "lowly", "learned", "little",
      "lofty", "lonely", "loyal", "lucky", "mad", "magnanimous", "magnificent", "malicious", "mean", "merciful",
      "merciless", "mighty", "miserable", "modest", "nasty", "naughty", "noble", "obedient", "obstinate",
      "old", "patient", "peaceful", "perfect", "perfidious", "pleasant", "polite", "poor", "powerful",
      "precious", "proud", "prudent", "pure", "quick", "rash", "reckless", "respectful", "rich", "righteous",
      "rude", "ruthless", "sad", "safe", "sage", "savage", "scheming", "selfish", "sensible", "serene",
      "severe", "shameful", "shameless", "shrewd", "sick", "silly", "simple", "sincere", "skilful", "skillful",
      "sly", "small", "smart", "sorry", "splendid", "stern", "strange", "strong", "stubborn", "stupid",
      "subtle", "superior", "suspicious", "sweet", "talented", "terrible", "treacherous", "true", "trustworthy",
      "ugly", "unfaithful", "unhappy", "unjust", "unkind", "unlucky", "unrighteous", "unworthy", "upright",
      "vain", "valiant", "vicious", "vile", "violent", "virtuous", "weak", "wealthy", "wicked", "wild", "wily",
      "wise", "wonderful", "worthless", "worthy", "wretched", "young", "zealous"};
}

/// Word-list tagger: members are JJ; -er/-est forms of members are JJR/JJS.
class LexiconTagger : public PosTagger {
 public:
  LexiconTagger() : LexiconTagger(default_adjectives()) {}
  explicit LexiconTagger(const std::vector<std::string>& adjectives) {
    for (const auto& a : adjectives) words_.insert(to_lower_ascii(a));
  }

  std::vector<TaggedToken> tag(std::string_view text) override {
    std::vector<TaggedToken> out;
    for (auto& tok : tokenize(text)) {
      TaggedToken t{tok, "XX", tok};
      if (words_.count(tok)) {
        t.tag = "JJ";
      } else if (auto base = degree_base(tok, "est")) {
        t.tag = "JJS";
        t.lemma = *base;
      } else if (auto base2 = degree_base(tok, "er")) {
        t.tag = "JJR";
        t.lemma = *base2;
      }
      out.push_back(std::move(t));
    }
    return out;
  }

 private:
  // greater -> great, wiser -> wise, bigger -> big, happier -> happy
  std::optional<std::string> degree_base(const std::string& tok, std::string_view suffix) const {
    if (tok.size() <= suffix.size() + 1 || tok.compare(tok.size() - suffix.size(), suffix.size(), suffix) != 0)
      return std::nullopt;
    const std::string stem = tok.substr(0, tok.size() - suffix.size());
    std::vector<std::string> cands{stem, stem + "e"};
    if (stem.size() >= 2 && stem.back() == stem[stem.size() - 2]) cands.push_back(stem.substr(0, stem.size() - 1));
    if (stem.back() == 'i') cands.push_back(stem.substr(0, stem.size() - 1) + "y");
    for (const auto& c : cands)
      if (words_.count(c)) return c;
    return std::nullopt;
  }

  std::set<std::string> words_;
};

/// POSTs {"version":1,"text":"..."} to `<base_url>/tag`, expecting
/// {"tokens":[{"text":"...","tag":"JJ","lemma":"..."}]}.
class HttpTagger : public PosTagger {
 public:
  explicit HttpTagger(std::string base_url, std::chrono::seconds timeout = std::chrono::seconds(30))
      : timeout_(timeout) {
    auto scheme = base_url.find("://");
    auto path_at = base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    host_ = base_url.substr(0, path_at);
    path_ = path_at == std::string::npos ? "/tag" : base_url.substr(path_at);
  }

  std::vector<TaggedToken> tag(std::string_view text) override {
    httplib::Client client(host_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    nlohmann::json req{{"version", 1}, {"text", std::string(text)}};
    auto res = client.Post(path_, req.dump(), "application/json");
    if (!res) throw AdapterError("tagger at " + host_ + " unreachable");
    if (res->status != 200) throw AdapterError("tagger returned HTTP " + std::to_string(res->status));
    try {
      const auto j = nlohmann::json::parse(res->body);
      std::vector<TaggedToken> out;
      for (const auto& t : j.at("tokens")) {
        TaggedToken tok;
        tok.text = to_lower_ascii(t.at("text").get<std::string>());
        tok.tag = t.at("tag").get<std::string>();
        tok.lemma = to_lower_ascii(t.value("lemma", tok.text));
        out.push_back(std::move(tok));
      }
      return out;
    } catch (const nlohmann::json::exception& e) {
      throw AdapterError(std::string("malformed tagger response: ") + e.what());
    }
  }

 private:
  std::string host_;
  std::string path_;
  std::chrono::seconds timeout_;
};

// ---------------------------------------------------------------------------------------------
// Collection and scoring

struct EvaluativeWordSet {
  std::string target;
  std::map<std::string, std::uint64_t> words;  // adjective lemma -> instance count

  std::uint64_t instances() const {
    std::uint64_t n = 0;
    for (const auto& [w, c] : words) n += c;
    return n;
  }
};

struct CollectOptions {
  /// Successive items stay in one conversation while the narration between their quotes is at
  /// most this many bytes; empty means a conversation spans the whole chapter.
  std::optional<std::size_t> conversation_gap = 300;
};

/// Splits the corpus into conversations: maximal runs of successive items in one chapter.
inline std::vector<std::pair<std::size_t, std::size_t>> conversations(const std::vector<CorpusItem>& corpus,
                                                                      const CollectOptions& opts = {}) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;  // [begin, end) indices
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= corpus.size(); ++i) {
    bool split = i == corpus.size();
    if (!split) {
      const auto& prev = corpus[i - 1];
      const auto& cur = corpus[i];
      split = cur.chapter != prev.chapter;
      if (!split && opts.conversation_gap) {
        const std::size_t prev_end = prev.char_offset + prev.talk.size();
        const std::size_t gap = cur.char_offset > prev_end ? cur.char_offset - prev_end : 0;
        // allow for the two quote glyphs of the previous talk
        split = gap > *opts.conversation_gap + 6;
      }
    }
    if (split && i > begin) {
      runs.emplace_back(begin, i);
      begin = i;
    }
  }
  return runs;
}

/// Adjectives spoken by others in conversations that mention `target` by any of its names.
/// Talks attributed to the target itself are skipped.
inline EvaluativeWordSet collect_evaluative(const std::vector<CorpusItem>& corpus,
                                            const std::vector<ResolvedSpeaker>& resolved, const std::string& target,
                                            const CharacterRegistry& registry, PosTagger& tagger,
                                            const CollectOptions& opts = {}) {
  const auto id = registry.lookup(target);
  if (!id) throw DataError("unknown target character '" + target + "'");
  const auto names = registry.surfaces_of(*id);
  std::map<std::int64_t, std::string> speaker_of;
  for (const auto& r : resolved) speaker_of[r.item_id] = r.speaker;

  EvaluativeWordSet set;
  set.target = *id;
  for (const auto& [b, e] : conversations(corpus, opts)) {
    bool involved = false;
    for (std::size_t i = b; i < e && !involved; ++i)
      for (const auto& name : names)
        if (contains_word(corpus[i].talk, name) || contains_word(corpus[i].context, name)) {
          involved = true;
          break;
        }
    if (!involved) continue;
    for (std::size_t i = b; i < e; ++i) {
      auto sp = speaker_of.find(corpus[i].id);
      if (sp != speaker_of.end() && sp->second == *id) continue;
      for (const auto& tok : tagger.tag(corpus[i].talk))
        if (is_adjective_tag(tok.tag)) ++set.words[tok.lemma];
    }
  }
  return set;
}

struct SentimentScore {
  std::string target;
  std::uint64_t n = 0;
  double score = 0.0;
};

/// Mean of (posScore - negScore) over the given instances.
inline double sentiment_score(std::span<const Polarity> instances) {
  if (instances.empty()) throw NoScoreError("no scored evaluative words");
  double sum = 0.0;
  for (const auto& p : instances) sum += p.positive - p.negative;
  return sum / static_cast<double>(instances.size());
}

enum class ScoreUnit { instances, types };

/// Averages polarity over word instances found in the lexicon (or over distinct words).
inline SentimentScore score(const EvaluativeWordSet& words, const SentimentLexicon& lexicon,
                            ScoreUnit unit = ScoreUnit::instances,
                            SenseAggregation agg = SenseAggregation::mean) {
  SentimentScore s;
  s.target = words.target;
  double sum = 0.0;
  for (const auto& [w, count] : words.words) {
    const auto p = lexicon.lookup(w, 'a', agg);
    if (!p) continue;
    const std::uint64_t weight = unit == ScoreUnit::instances ? count : 1;
    sum += static_cast<double>(weight) * (p->positive - p->negative);
    s.n += weight;
  }
  if (s.n == 0) throw NoScoreError("no evaluative word of '" + words.target + "' has a lexicon entry");
  s.score = sum / static_cast<double>(s.n);
  return s;
}

/// Descending by count, ties alphabetical, at most `top_n` entries.
inline std::vector<std::pair<std::string, std::uint64_t>> rank_words(const EvaluativeWordSet& words,
                                                                     std::size_t top_n) {
  std::vector<std::pair<std::string, std::uint64_t>> out(words.words.begin(), words.words.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (out.size() > top_n) out.resize(top_n);
  return out;
}

inline nlohmann::ordered_json to_ordered_json(const SentimentScore& s) {
  nlohmann::ordered_json j;
  j["target"] = s.target;
  j["n"] = s.n;
  j["score"] = s.score;
  return j;
}

inline std::string word_frequency_csv(const std::vector<std::pair<std::string, std::uint64_t>>& ranked) {
  std::string out = "word,count\n";
  for (const auto& [w, c] : ranked) out += w + "," + std::to_string(c) + "\n";
  return out;
}

}  // namespace narrative_net
