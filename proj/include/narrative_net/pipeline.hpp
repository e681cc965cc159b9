#pragma once

// End-to-end run: extract, attribute, resolve, graph and stages, metrics, sentiment.
// Every stage writes its artifact before the next starts; manifest.json closes the run.

#include <openssl/evp.h>

#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "narrative_net/alias_resolution.hpp"
#include "narrative_net/error.hpp"
#include "narrative_net/graph_io.hpp"
#include "narrative_net/graph_metrics.hpp"
#include "narrative_net/sentiment.hpp"
#include "narrative_net/social_graph.hpp"
#include "narrative_net/speaker_attribution.hpp"
#include "narrative_net/text_ingest.hpp"
#include "narrative_net/text_util.hpp"

namespace narrative_net {

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::internal, "sha256 failed");
  std::ostringstream o;
  for (unsigned int i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return o.str();
}

inline QuoteStyle parse_quote_style(std::string_view s) {
  if (s == "curly") return QuoteStyle::curly();
  if (s == "straight") return QuoteStyle::straight();
  if (s == "both" || s == "curly+straight") return QuoteStyle::curly_and_straight();
  throw ConfigError("unknown quote style '" + std::string(s) + "' (curly, straight, both)");
}

/// Resolves every labeled item's surface to a canonical id, in item order. Unresolved
/// surfaces are dropped and counted.
struct ResolveOutcome {
  std::vector<ResolvedSpeaker> resolved;
  std::size_t unresolved = 0;
};

inline ResolveOutcome resolve_labels(const std::vector<CorpusItem>& corpus, const std::vector<LabelEntry>& log,
                                     const CharacterRegistry& registry) {
  const auto decisions = current_decisions(log);
  ResolveOutcome out;
  for (const auto& item : corpus) {
    auto it = decisions.find(item.id);
    if (it == decisions.end() || !it->second.label) continue;
    const auto& l = *it->second.label;
    const auto r = resolve(l.speaker_surface, item.chapter, item.context, registry, l.start);
    if (!r.id) {
      ++out.unresolved;
      continue;
    }
    out.resolved.push_back({item.id, item.chapter, *r.id, l.speaker_surface, r.step, r.distance});
  }
  return out;
}

/// Heuristic labels for every item, with human decisions from `overrides` taking precedence.
inline std::vector<LabelEntry> attribute_corpus(const std::vector<CorpusItem>& corpus,
                                                const CharacterRegistry& registry,
                                                const std::vector<LabelEntry>& overrides = {},
                                                const AttributionConfig& config = {}) {
  const auto human = current_decisions(overrides);
  std::vector<LabelEntry> out;
  for (const auto& item : corpus) {
    if (auto it = human.find(item.id); it != human.end()) {
      if (it->second.label) validate_label(*it->second.label, item);
      out.push_back(it->second);
    } else if (auto l = heuristic_attribute(item, registry, config)) {
      out.push_back({item.id, std::move(l)});
    }
  }
  return out;
}

struct PipelineConfig {
  std::string raw;
  std::string source_id;
  std::string rules;  // empty: built-in cleaning rules
  std::string registry;
  std::string stages;   // empty: full graph only
  std::string lexicon;  // empty: no sentiment stage
  std::string labels;   // optional human label log overriding the heuristic
  std::string quote_style = "curly";
  std::optional<std::uint64_t> seed;
  std::size_t swi_samples = 10;
  std::optional<std::size_t> stage_count;
  std::vector<std::string> targets;

  /// Relative paths resolve against `base_dir`.
  static PipelineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    PipelineConfig c;
    auto path = [&](const char* key) -> std::string {
      if (!j.contains(key) || j.at(key).is_null()) return {};
      const std::filesystem::path p = j.at(key).get<std::string>();
      return (p.is_absolute() || base_dir.empty() ? p : base_dir / p).lexically_normal().string();
    };
    try {
      c.raw = path("raw");
      c.rules = path("rules");
      c.registry = path("registry");
      c.stages = path("stages");
      c.lexicon = path("lexicon");
      c.labels = path("labels");
      c.source_id = j.value("source_id", std::filesystem::path(c.raw).stem().string());
      c.quote_style = j.value("quote_style", std::string("curly"));
      if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
      c.swi_samples = j.value("swi_samples", std::size_t{10});
      if (j.contains("stage_count")) c.stage_count = j.at("stage_count").get<std::size_t>();
      if (j.contains("targets")) c.targets = j.at("targets").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid pipeline config: ") + e.what());
    }
    return c;
  }

  static PipelineConfig load(const std::string& path) {
    try {
      return from_json(nlohmann::json::parse(read_file(path)), std::filesystem::path(path).parent_path());
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }

  /// Checks required fields and that every referenced file exists.
  void validate() const {
    if (raw.empty()) throw ConfigError("config: 'raw' is required");
    if (registry.empty()) throw ConfigError("config: 'registry' is required");
    for (const auto* p : {&raw, &rules, &registry, &stages, &lexicon, &labels})
      if (!p->empty() && !std::filesystem::is_regular_file(*p)) throw ConfigError("config: file not found: " + *p);
    if (swi_samples > 0 && !seed) throw ConfigError("config: a seed is required when swi_samples > 0");
    if (!targets.empty() && lexicon.empty()) throw ConfigError("config: sentiment targets need a lexicon");
    parse_quote_style(quote_style);
  }
};

/// A stage failure; carries the failing stage and the original error class.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.kind(), "stage '" + stage + "' failed: " + cause.what()), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct ArtifactRecord {
  std::string name;
  std::string sha256;
  std::size_t bytes = 0;
};

struct PipelineResult {
  std::vector<ArtifactRecord> artifacts;
  std::string manifest;  // manifest.json contents
};

inline nlohmann::ordered_json sentiment_json(const std::vector<CorpusItem>& corpus,
                                             const std::vector<ResolvedSpeaker>& resolved,
                                             const CharacterRegistry& registry, const SentimentLexicon& lexicon,
                                             const std::vector<std::string>& targets, PosTagger& tagger) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& t : targets) {
    const auto words = collect_evaluative(corpus, resolved, t, registry, tagger);
    nlohmann::ordered_json j;
    try {
      j = to_ordered_json(score(words, lexicon));
    } catch (const NoScoreError&) {
      j["target"] = words.target;
      j["n"] = 0;
      j["score"] = nullptr;
    }
    j["words"] = nlohmann::ordered_json::array();
    for (const auto& [w, c] : rank_words(words, 50)) j["words"].push_back({w, c});
    out.push_back(j);
  }
  return out;
}

/// Runs the whole pipeline into `out_dir`. A failing stage throws StageError after the
/// artifacts of earlier stages have been written.
inline PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), ec.message());

  PipelineResult result;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file((out_dir / name).string(), content);
    result.artifacts.push_back({name, sha256_hex(content), content.size()});
  };
  auto stage = [&](const std::string& name, auto&& fn) {
    try {
      fn();
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(name, e);
    } catch (const std::exception& e) {
      throw StageError(name, Error(ErrorKind::internal, e.what()));
    }
  };

  std::optional<CharacterRegistry> registry;
  std::vector<CorpusItem> corpus;
  std::vector<LabelEntry> labels;
  std::vector<ResolvedSpeaker> resolved;
  SocialGraph graph;

  stage("extract", [&] {
    registry.emplace(load_registry(config.registry));
    RawText raw{read_file(config.raw), config.source_id.empty() ? "text" : config.source_id};
    const auto rules = config.rules.empty() ? default_cleaning_rules() : parse_cleaning_rules(read_file(config.rules));
    ExtractOptions opts;
    opts.quote_style = parse_quote_style(config.quote_style);
    corpus = extract_corpus(clean_text(raw, rules), opts);
    emit("corpus.jsonl", corpus_to_jsonl(corpus));
  });
  stage("attribute", [&] {
    std::vector<LabelEntry> human;
    if (!config.labels.empty()) human = replay_label_log(read_file(config.labels), config.labels).entries;
    labels = attribute_corpus(corpus, *registry, human);
    emit("labels.jsonl", labels_to_jsonl(labels));
  });
  stage("resolve", [&] {
    resolved = resolve_labels(corpus, labels, *registry).resolved;
    emit("resolved.jsonl", resolved_to_jsonl(resolved));
  });
  stage("graph", [&] {
    graph = build_graph(resolved, *registry);
    graph.source = config.source_id;
    emit("network.gexf", to_gexf(graph));
    if (!config.stages.empty()) {
      nlohmann::json plan_json;
      try {
        plan_json = nlohmann::json::parse(read_file(config.stages));
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config.stages + ": " + e.what());
      }
      auto plan = stage_plan_from_json(plan_json);
      if (config.stage_count) plan.stage_count = *config.stage_count;
      std::vector<StageStats> stats;
      for (const auto& g : build_stages(resolved, corpus, plan, *registry)) stats.push_back(stage_stats(g));
      nlohmann::ordered_json j;
      j["stages"] = nlohmann::ordered_json::array();
      for (const auto& s : stats) j["stages"].push_back(to_ordered_json(s));
      j["average_node_growth_percent"] = detail::opt_json(average_node_growth(stats));
      emit("stages.json", j.dump(2) + "\n");
    }
  });
  stage("metrics", [&] {
    const auto report = compute_report(graph, config.swi_samples, config.seed.value_or(0));
    emit("metrics.json", to_ordered_json(report).dump(2) + "\n");
  });
  if (!config.lexicon.empty()) {
    stage("sentiment", [&] {
      const auto lexicon = SentimentLexicon::load(config.lexicon);
      LexiconTagger tagger;
      emit("sentiment.json",
           sentiment_json(corpus, resolved, *registry, lexicon, config.targets, tagger).dump(2) + "\n");
    });
  }

  nlohmann::ordered_json m;
  m["tool"] = "narrative-net";
  m["source_id"] = config.source_id;
  m["seed"] = config.seed ? nlohmann::ordered_json(*config.seed) : nlohmann::ordered_json(nullptr);
  m["swi_samples"] = config.swi_samples;
  m["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& a : result.artifacts) {
    nlohmann::ordered_json aj;
    aj["name"] = a.name;
    aj["sha256"] = a.sha256;
    aj["bytes"] = a.bytes;
    m["artifacts"].push_back(aj);
  }
  result.manifest = m.dump(2) + "\n";
  write_file((out_dir / "manifest.json").string(), result.manifest);
  return result;
}

}  // namespace narrative_net
