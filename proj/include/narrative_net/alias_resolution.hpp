#pragma once

// Character registry and surface-name resolution.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "narrative_net/error.hpp"
#include "narrative_net/text_util.hpp"

namespace narrative_net {

struct Character {
  std::string id;
  std::string canonical_name;
};

struct ChapterRange {
  int first = 1;
  int last = 1;
  bool contains(int chapter) const noexcept { return chapter >= first && chapter <= last; }
};

struct AliasRule {
  std::string surface;
  std::string target;
  std::optional<ChapterRange> chapter_range;
  std::vector<std::string> ambiguity_group;  // empty = plain alias

  bool valid_in(int chapter) const noexcept { return !chapter_range || chapter_range->contains(chapter); }
};

class CharacterRegistry {
 public:
  CharacterRegistry() = default;

  /// Throws DataError on duplicate ids/names, unknown rule targets or inverted chapter ranges.
  CharacterRegistry(std::vector<Character> characters, std::vector<AliasRule> rules,
                    std::vector<std::string> manual_append = {})
      : characters_(std::move(characters)), rules_(std::move(rules)), manual_append_(std::move(manual_append)) {
    for (const auto& c : characters_) {
      if (c.id.empty() || c.canonical_name.empty()) throw DataError("character with empty id or canonical_name");
      if (!by_id_.emplace(c.id, by_id_.size()).second) throw DataError("duplicate character id '" + c.id + "'");
      if (!by_name_.emplace(c.canonical_name, c.id).second)
        throw DataError("duplicate canonical name '" + c.canonical_name + "'");
    }
    for (const auto& r : rules_) {
      if (r.surface.empty()) throw DataError("alias rule with empty surface");
      if (!by_id_.count(r.target))
        throw DataError("alias rule '" + r.surface + "' targets unknown character '" + r.target + "'");
      if (r.chapter_range && r.chapter_range->first > r.chapter_range->last)
        throw DataError("alias rule '" + r.surface + "' has chapter_range first > last");
      for (const auto& g : r.ambiguity_group)
        if (!by_id_.count(g))
          throw DataError("alias rule '" + r.surface + "' ambiguity_group names unknown character '" + g + "'");
    }
    for (const auto& name : manual_append_)
      if (!by_name_.count(name) && !by_id_.count(name))
        throw DataError("manual_append names unknown character '" + name + "'");
  }

  const std::vector<Character>& characters() const noexcept { return characters_; }
  const std::vector<AliasRule>& alias_rules() const noexcept { return rules_; }
  const std::vector<std::string>& manual_append() const noexcept { return manual_append_; }

  bool has_id(std::string_view id) const { return by_id_.count(std::string(id)) > 0; }

  const Character* find_by_id(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &characters_[it->second];
  }

  std::optional<std::string> id_for_canonical(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  /// Accepts either a canonical id or a canonical name.
  std::optional<std::string> lookup(std::string_view id_or_name) const {
    if (has_id(id_or_name)) return std::string(id_or_name);
    return id_for_canonical(id_or_name);
  }

  /// Every distinct string that can name some character: canonical names and alias surfaces.
  std::vector<std::string> all_surfaces() const {
    std::set<std::string> s;
    for (const auto& c : characters_) s.insert(c.canonical_name);
    for (const auto& r : rules_) s.insert(r.surface);
    return {s.begin(), s.end()};
  }

  /// Canonical name plus every alias surface whose rules name `id` as target.
  std::vector<std::string> surfaces_of(std::string_view id) const {
    std::set<std::string> s;
    if (const auto* c = find_by_id(id)) s.insert(c->canonical_name);
    for (const auto& r : rules_)
      if (r.target == id) s.insert(r.surface);
    return {s.begin(), s.end()};
  }

 private:
  std::vector<Character> characters_;
  std::vector<AliasRule> rules_;
  std::vector<std::string> manual_append_;
  std::map<std::string, std::size_t> by_id_;
  std::map<std::string, std::string> by_name_;
};

inline CharacterRegistry registry_from_json(const nlohmann::json& j) {
  try {
    std::vector<Character> chars;
    for (const auto& c : j.value("characters", nlohmann::json::array())) {
      Character ch;
      ch.canonical_name = c.at("canonical_name").get<std::string>();
      ch.id = c.contains("id") ? c.at("id").get<std::string>() : ch.canonical_name;
      chars.push_back(std::move(ch));
    }
    std::vector<AliasRule> rules;
    for (const auto& r : j.value("alias_rules", nlohmann::json::array())) {
      AliasRule rule;
      rule.surface = r.at("surface").get<std::string>();
      rule.target = r.at("target").get<std::string>();
      if (r.contains("chapter_range") && !r.at("chapter_range").is_null()) {
        const auto& cr = r.at("chapter_range");
        rule.chapter_range = ChapterRange{cr.at(0).get<int>(), cr.at(1).get<int>()};
      }
      if (r.contains("ambiguity_group")) rule.ambiguity_group = r.at("ambiguity_group").get<std::vector<std::string>>();
      rules.push_back(std::move(rule));
    }
    auto manual = j.value("manual_append", std::vector<std::string>{});
    return CharacterRegistry(std::move(chars), std::move(rules), std::move(manual));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid character registry: ") + e.what());
  }
}

inline CharacterRegistry load_registry(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return registry_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ": " + e.what());
  }
}

enum class ResolutionStep { canonical, chapter_alias, global_alias, context, unresolved };

inline std::string to_string(ResolutionStep s) {
  switch (s) {
    case ResolutionStep::canonical: return "canonical";
    case ResolutionStep::chapter_alias: return "chapter-alias";
    case ResolutionStep::global_alias: return "global-alias";
    case ResolutionStep::context: return "context";
    case ResolutionStep::unresolved: return "unresolved";
  }
  return "unresolved";
}

struct Resolution {
  std::optional<std::string> id;
  ResolutionStep step = ResolutionStep::unresolved;
  /// Byte distance to the disambiguating full-name mention (context step only).
  std::optional<std::size_t> distance;

  bool resolved() const noexcept { return id.has_value(); }
};

namespace detail {

// Nearest preceding full-name mention of any candidate, then nearest following.
inline Resolution resolve_by_context(const std::set<std::string>& candidates, std::string_view context,
                                     std::size_t anchor, std::size_t anchor_end,
                                     const CharacterRegistry& registry) {
  std::optional<std::pair<std::size_t, std::string>> best_before, best_after;
  for (const auto& id : candidates) {
    const auto* ch = registry.find_by_id(id);
    if (!ch) continue;
    for (std::size_t pos : find_word_occurrences(context, ch->canonical_name)) {
      const std::size_t end = pos + ch->canonical_name.size();
      if (end <= anchor) {
        const std::size_t d = anchor - end;
        if (!best_before || d < best_before->first || (d == best_before->first && id < best_before->second))
          best_before = {d, id};
      } else if (pos >= anchor_end) {
        const std::size_t d = pos - anchor_end;
        if (!best_after || d < best_after->first || (d == best_after->first && id < best_after->second))
          best_after = {d, id};
      }
    }
  }
  const auto& pick = best_before ? best_before : best_after;
  if (!pick) return {};
  return {pick->second, ResolutionStep::context, pick->first};
}

}  // namespace detail

/// Maps a surface name to a canonical id.
///
/// Specificity order: exact canonical name, then a unique alias rule scoped to this chapter,
/// then a unique global alias, then context disambiguation among the candidates (ambiguity
/// groups plus any conflicting alias targets). `anchor` is the byte offset of the surface in
/// `context`; when absent the first occurrence is used, or the end of the context. The result
/// never depends on rule order.
inline Resolution resolve(std::string_view surface, int chapter, std::string_view context,
                          const CharacterRegistry& registry, std::optional<std::size_t> anchor = std::nullopt) {
  if (auto id = registry.id_for_canonical(surface)) return {*id, ResolutionStep::canonical, std::nullopt};

  std::set<std::string> scoped, global, ambiguous;
  for (const auto& r : registry.alias_rules()) {
    if (r.surface != surface || !r.valid_in(chapter)) continue;
    if (!r.ambiguity_group.empty()) {
      ambiguous.insert(r.ambiguity_group.begin(), r.ambiguity_group.end());
      ambiguous.insert(r.target);
    } else if (r.chapter_range) {
      scoped.insert(r.target);
    } else {
      global.insert(r.target);
    }
  }
  if (scoped.size() == 1) return {*scoped.begin(), ResolutionStep::chapter_alias, std::nullopt};
  if (scoped.empty() && global.size() == 1) return {*global.begin(), ResolutionStep::global_alias, std::nullopt};

  std::set<std::string> candidates = ambiguous;
  if (scoped.size() > 1)
    candidates.insert(scoped.begin(), scoped.end());
  else if (global.size() > 1)
    candidates.insert(global.begin(), global.end());
  if (candidates.empty()) return {};

  std::size_t at = context.size();
  if (anchor) {
    at = std::min(*anchor, context.size());
  } else {
    const auto hits = find_word_occurrences(context, surface);
    if (!hits.empty()) at = hits.front();
  }
  const std::size_t at_end = std::min(context.size(), at + (at < context.size() ? surface.size() : 0));
  return detail::resolve_by_context(candidates, context, at, at_end, registry);
}

/// Reports unreachable rules, conflicting surfaces and aliases shadowed by canonical names.
/// `max_chapter` enables the reachability check.
inline std::vector<std::string> validate_registry(const CharacterRegistry& registry,
                                                  std::optional<int> max_chapter = std::nullopt) {
  std::vector<std::string> warnings;
  const auto& rules = registry.alias_rules();
  for (const auto& r : rules) {
    if (max_chapter && r.chapter_range && (r.chapter_range->last < 1 || r.chapter_range->first > *max_chapter)) {
      warnings.push_back("alias '" + r.surface + "' -> " + r.target + ": chapter_range (" +
                         std::to_string(r.chapter_range->first) + ", " + std::to_string(r.chapter_range->last) +
                         ") is unreachable in a " + std::to_string(*max_chapter) + "-chapter corpus");
    }
    if (auto owner = registry.id_for_canonical(r.surface)) {
      warnings.push_back("alias '" + r.surface + "' -> " + r.target + " is shadowed by the canonical name of " +
                         *owner);
    }
    if (!r.ambiguity_group.empty()) {
      std::set<std::string> g(r.ambiguity_group.begin(), r.ambiguity_group.end());
      g.insert(r.target);
      if (g.size() < 2)
        warnings.push_back("alias '" + r.surface + "' has an ambiguity_group naming a single character");
    }
  }
  auto overlaps = [](const AliasRule& a, const AliasRule& b) {
    if (!a.chapter_range || !b.chapter_range) return true;
    return a.chapter_range->first <= b.chapter_range->last && b.chapter_range->first <= a.chapter_range->last;
  };
  std::set<std::string> reported;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    for (std::size_t j = i + 1; j < rules.size(); ++j) {
      const auto& a = rules[i];
      const auto& b = rules[j];
      if (a.surface != b.surface || a.target == b.target) continue;
      if (!a.ambiguity_group.empty() || !b.ambiguity_group.empty()) continue;
      if (!overlaps(a, b) || (a.chapter_range.has_value() != b.chapter_range.has_value())) continue;
      if (reported.insert(a.surface).second)
        warnings.push_back("alias '" + a.surface + "' maps to several characters (" + a.target + ", " + b.target +
                           ") without an ambiguity_group");
    }
  }
  return warnings;
}

}  // namespace narrative_net
