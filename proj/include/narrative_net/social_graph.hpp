#pragma once

// Weighted undirected character graph and its cumulative stage slices.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "narrative_net/alias_resolution.hpp"
#include "narrative_net/error.hpp"
#include "narrative_net/text_ingest.hpp"
#include "narrative_net/text_util.hpp"

namespace narrative_net {

/// A talk whose speaker resolved to a canonical character.
struct ResolvedSpeaker {
  std::int64_t item_id = 0;
  int chapter = 1;
  std::string speaker;  // canonical id
  std::string surface;
  ResolutionStep step = ResolutionStep::canonical;
  std::optional<std::size_t> distance;

  bool operator==(const ResolvedSpeaker&) const = default;
};

inline nlohmann::ordered_json to_ordered_json(const ResolvedSpeaker& r) {
  nlohmann::ordered_json j;
  j["item_id"] = r.item_id;
  j["chapter"] = r.chapter;
  j["speaker"] = r.speaker;
  j["surface"] = r.surface;
  j["step"] = to_string(r.step);
  if (r.distance) j["distance"] = *r.distance;
  return j;
}

inline ResolvedSpeaker resolved_from_json(const nlohmann::json& j) {
  ResolvedSpeaker r;
  r.item_id = j.at("item_id").get<std::int64_t>();
  r.chapter = j.at("chapter").get<int>();
  r.speaker = j.at("speaker").get<std::string>();
  r.surface = j.value("surface", r.speaker);
  const auto step = j.value("step", std::string("canonical"));
  for (auto s : {ResolutionStep::canonical, ResolutionStep::chapter_alias, ResolutionStep::global_alias,
                 ResolutionStep::context})
    if (to_string(s) == step) r.step = s;
  if (j.contains("distance")) r.distance = j.at("distance").get<std::size_t>();
  return r;
}

inline std::string resolved_to_jsonl(const std::vector<ResolvedSpeaker>& rs) {
  std::string out;
  for (const auto& r : rs) {
    out += to_ordered_json(r).dump();
    out += '\n';
  }
  return out;
}

inline std::vector<ResolvedSpeaker> resolved_from_jsonl(std::string_view text, const std::string& origin = "resolved") {
  std::vector<ResolvedSpeaker> out;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (is_blank(line)) continue;
    try {
      out.push_back(resolved_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

class SocialGraph {
 public:
  using Edge = std::pair<std::string, std::string>;

  /// Adds `id` if absent; a nonempty label replaces an empty one.
  void add_node(const std::string& id, const std::string& label = {}) {
    auto [it, inserted] = nodes_.emplace(id, label.empty() ? id : label);
    if (!inserted && !label.empty() && it->second == id) it->second = label;
  }

  /// Increments the undirected edge {a, b}. Self-pairs are ignored.
  void add_interaction(const std::string& a, const std::string& b, std::uint64_t weight = 1) {
    if (a == b || weight == 0) return;
    add_node(a);
    add_node(b);
    edges_[key(a, b)] += weight;
  }

  bool has_node(const std::string& id) const { return nodes_.count(id) > 0; }

  std::uint64_t weight(const std::string& a, const std::string& b) const {
    if (a == b) return 0;
    auto it = edges_.find(key(a, b));
    return it == edges_.end() ? 0 : it->second;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  std::size_t degree(const std::string& id) const {
    std::size_t d = 0;
    for (const auto& [e, w] : edges_)
      if (e.first == id || e.second == id) ++d;
    return d;
  }

  std::map<std::string, std::size_t> degrees() const {
    std::map<std::string, std::size_t> d;
    for (const auto& [id, label] : nodes_) d[id] = 0;
    for (const auto& [e, w] : edges_) {
      ++d[e.first];
      ++d[e.second];
    }
    return d;
  }

  const std::map<std::string, std::string>& nodes() const noexcept { return nodes_; }
  const std::map<Edge, std::uint64_t>& edges() const noexcept { return edges_; }

  std::string source;
  std::optional<int> stage;

  bool operator==(const SocialGraph& o) const { return nodes_ == o.nodes_ && edges_ == o.edges_; }

 private:
  static Edge key(const std::string& a, const std::string& b) { return a < b ? Edge{a, b} : Edge{b, a}; }

  std::map<std::string, std::string> nodes_;
  std::map<Edge, std::uint64_t> edges_;
};

/// Builds the interaction graph from speakers in item order.
///
/// Within each chapter every pair of successive speakers forms one interaction when they
/// differ (a sliding window of two over the chapter's speaker sequence). Characters listed in
/// the registry's manual_append are added even when isolated.
inline SocialGraph build_graph(const std::vector<ResolvedSpeaker>& resolved, const CharacterRegistry& registry) {
  SocialGraph g;
  auto label_of = [&](const std::string& id) {
    const auto* c = registry.find_by_id(id);
    return c ? c->canonical_name : id;
  };
  const ResolvedSpeaker* prev = nullptr;
  for (const auto& r : resolved) {
    if (prev && r.item_id <= prev->item_id) throw DataError("resolved speakers are not ordered by item_id");
    g.add_node(r.speaker, label_of(r.speaker));
    if (prev && prev->chapter == r.chapter) g.add_interaction(prev->speaker, r.speaker);
    prev = &r;
  }
  for (const auto& name : registry.manual_append()) {
    auto id = registry.lookup(name);
    if (id) g.add_node(*id, label_of(*id));
  }
  return g;
}

struct StageMarker {
  std::optional<int> chapter;  // first item in this chapter or later
  std::string pattern;         // otherwise: first item whose talk or context matches
  std::string label;

  std::string describe() const {
    if (!label.empty()) return label;
    return chapter ? "chapter " + std::to_string(*chapter) : pattern;
  }
};

struct StagePlan {
  std::vector<StageMarker> markers;
  std::size_t stage_count = 5;
};

inline StagePlan stage_plan_from_json(const nlohmann::json& j) {
  try {
    StagePlan plan;
    plan.stage_count = j.value("stage_count", std::size_t{5});
    if (plan.stage_count == 0) throw ConfigError("stage plan: stage_count must be >= 1");
    for (const auto& m : j.at("markers")) {
      StageMarker marker;
      if (m.contains("chapter")) marker.chapter = m.at("chapter").get<int>();
      marker.pattern = m.value("regex", std::string{});
      marker.label = m.value("label", std::string{});
      if (!marker.chapter && marker.pattern.empty()) throw ConfigError("stage marker needs a chapter or a regex");
      plan.markers.push_back(std::move(marker));
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid stage plan: ") + e.what());
  }
}

/// Item id at which each segment after the first begins. Each marker is searched after the
/// previous one's item, so positions are strictly increasing; missing markers throw ConfigError.
inline std::vector<std::int64_t> locate_markers(const std::vector<CorpusItem>& corpus, const StagePlan& plan) {
  std::vector<std::int64_t> starts;
  std::size_t from = 0;
  for (const auto& m : plan.markers) {
    std::optional<std::size_t> found;
    std::optional<std::regex> re;
    if (!m.chapter) {
      try {
        re.emplace(m.pattern, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw ConfigError("stage marker '" + m.describe() + "' does not compile: " + e.what());
      }
    }
    for (std::size_t i = from; i < corpus.size(); ++i) {
      const auto& item = corpus[i];
      const bool hit = m.chapter ? item.chapter >= *m.chapter
                                 : std::regex_search(item.talk, *re) || std::regex_search(item.context, *re);
      if (hit) {
        found = i;
        break;
      }
    }
    if (!found || (!starts.empty() && corpus[*found].id <= starts.back()))
      throw ConfigError("stage marker '" + m.describe() + "' not found in document order");
    starts.push_back(corpus[*found].id);
    from = *found + 1;
  }
  return starts;
}

/// Keeps `stage_count - 1` of the segment starts, merging adjacent segments evenly.
inline std::vector<std::int64_t> collapse_boundaries(const std::vector<std::int64_t>& starts, std::size_t stage_count) {
  const std::size_t segments = starts.size() + 1;
  if (stage_count == 0 || segments <= stage_count) return starts;
  std::vector<std::int64_t> kept;
  for (std::size_t i = 1; i < stage_count; ++i) {
    const auto j = static_cast<std::size_t>(std::llround(static_cast<double>(i * segments) / stage_count));
    const std::size_t idx = std::clamp<std::size_t>(j, 1, starts.size()) - 1;
    if (kept.empty() || starts[idx] > kept.back()) kept.push_back(starts[idx]);
  }
  return kept;
}

/// Cumulative stage graphs: stage k holds every speaker before the k-th kept boundary;
/// the final stage holds all of them.
inline std::vector<SocialGraph> build_stages(const std::vector<ResolvedSpeaker>& resolved,
                                             const std::vector<CorpusItem>& corpus, const StagePlan& plan,
                                             const CharacterRegistry& registry) {
  const auto bounds = collapse_boundaries(locate_markers(corpus, plan), plan.stage_count);
  std::vector<SocialGraph> stages;
  for (std::size_t k = 0; k <= bounds.size(); ++k) {
    std::vector<ResolvedSpeaker> prefix;
    for (const auto& r : resolved)
      if (k == bounds.size() || r.item_id < bounds[k]) prefix.push_back(r);
    auto g = build_graph(prefix, registry);
    g.stage = static_cast<int>(k + 1);
    stages.push_back(std::move(g));
  }
  return stages;
}

/// Subgraph induced on nodes whose degree is strictly greater than `min_degree`.
inline SocialGraph filter_by_degree(const SocialGraph& g, std::size_t min_degree) {
  const auto deg = g.degrees();
  SocialGraph out;
  out.source = g.source;
  out.stage = g.stage;
  for (const auto& [id, label] : g.nodes())
    if (deg.at(id) > min_degree) out.add_node(id, label);
  for (const auto& [e, w] : g.edges())
    if (out.has_node(e.first) && out.has_node(e.second)) out.add_interaction(e.first, e.second, w);
  return out;
}

}  // namespace narrative_net
