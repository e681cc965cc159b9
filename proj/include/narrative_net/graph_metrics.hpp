#pragma once

// Network measures over an immutable graph: size and diameter, clustering and path length,
// small-world index with lattice/random references, degree power-law fit, rich-club
// coefficient, and per-node degree/closeness/betweenness.
//
// Paths are unweighted hop counts throughout. Diameter and average path length are taken on
// the largest connected component; closeness and betweenness are per component.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "narrative_net/error.hpp"
#include "narrative_net/social_graph.hpp"

namespace narrative_net {

/// Index-based adjacency view of a graph. Neighbor lists are sorted.
struct Topology {
  std::vector<std::string> ids;
  std::vector<std::vector<std::size_t>> adj;
  std::vector<std::vector<std::uint64_t>> weights;  // parallel to adj

  std::size_t node_count() const noexcept { return adj.size(); }

  std::size_t edge_count() const noexcept {
    std::size_t twice = 0;
    for (const auto& a : adj) twice += a.size();
    return twice / 2;
  }

  std::size_t degree(std::size_t v) const { return adj[v].size(); }

  static Topology from(const SocialGraph& g) {
    Topology t;
    std::map<std::string, std::size_t> index;
    for (const auto& [id, label] : g.nodes()) {
      index.emplace(id, t.ids.size());
      t.ids.push_back(id);
    }
    t.adj.resize(t.ids.size());
    t.weights.resize(t.ids.size());
    for (const auto& [e, w] : g.edges()) {
      const auto a = index.at(e.first), b = index.at(e.second);
      t.adj[a].push_back(b);
      t.weights[a].push_back(w);
      t.adj[b].push_back(a);
      t.weights[b].push_back(w);
    }
    t.sort_neighbors();
    return t;
  }

  /// Unit-weight topology over nodes 0..n-1; duplicate and self edges are dropped.
  static Topology from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    Topology t;
    t.adj.resize(n);
    t.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.ids.push_back(std::to_string(i));
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (auto [a, b] : edges) {
      if (a == b || a >= n || b >= n) continue;
      if (!seen.insert({std::min(a, b), std::max(a, b)}).second) continue;
      t.adj[a].push_back(b);
      t.adj[b].push_back(a);
      t.weights[a].push_back(1);
      t.weights[b].push_back(1);
    }
    t.sort_neighbors();
    return t;
  }

 private:
  void sort_neighbors() {
    for (std::size_t v = 0; v < adj.size(); ++v) {
      std::vector<std::size_t> order(adj[v].size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return adj[v][x] < adj[v][y]; });
      std::vector<std::size_t> a;
      std::vector<std::uint64_t> w;
      for (auto i : order) {
        a.push_back(adj[v][i]);
        w.push_back(weights[v][i]);
      }
      adj[v] = std::move(a);
      weights[v] = std::move(w);
    }
  }
};

inline constexpr std::size_t kUnreachable = std::numeric_limits<std::size_t>::max();

inline std::vector<std::size_t> bfs_distances(const Topology& t, std::size_t source) {
  std::vector<std::size_t> dist(t.node_count(), kUnreachable);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    for (auto w : t.adj[v])
      if (dist[w] == kUnreachable) {
        dist[w] = dist[v] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

/// Nodes of the largest connected component; ties go to the component holding the lowest index.
inline std::vector<std::size_t> largest_component(const Topology& t) {
  std::vector<bool> seen(t.node_count(), false);
  std::vector<std::size_t> best;
  for (std::size_t s = 0; s < t.node_count(); ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> comp;
    const auto dist = bfs_distances(t, s);
    for (std::size_t v = 0; v < dist.size(); ++v)
      if (dist[v] != kUnreachable) {
        seen[v] = true;
        comp.push_back(v);
      }
    if (comp.size() > best.size()) best = std::move(comp);
  }
  return best;
}

struct BasicStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t diameter = 0;
  bool edgeless = false;  // diameter reported as 0
};

inline BasicStats basic_stats(const Topology& t) {
  BasicStats s;
  s.nodes = t.node_count();
  s.edges = t.edge_count();
  s.edgeless = s.edges == 0;
  for (auto v : largest_component(t)) {
    const auto dist = bfs_distances(t, v);
    for (auto d : dist)
      if (d != kUnreachable) s.diameter = std::max(s.diameter, d);
  }
  return s;
}

inline std::vector<double> local_clustering(const Topology& t) {
  std::vector<double> c(t.node_count(), 0.0);
  for (std::size_t v = 0; v < t.node_count(); ++v) {
    const auto& nb = t.adj[v];
    const std::size_t k = nb.size();
    if (k < 2) continue;
    std::size_t links = 0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& ni = t.adj[nb[i]];
      for (std::size_t j = i + 1; j < k; ++j)
        if (std::binary_search(ni.begin(), ni.end(), nb[j])) ++links;
    }
    c[v] = 2.0 * static_cast<double>(links) / (static_cast<double>(k) * static_cast<double>(k - 1));
  }
  return c;
}

struct ClusteringPath {
  double clustering = 0.0;    // mean local coefficient over all nodes, 0 for degree < 2
  double path_length = 0.0;   // mean hop distance over node pairs of the largest component
};

inline double average_clustering(const Topology& t) {
  if (t.node_count() == 0) return 0.0;
  const auto c = local_clustering(t);
  return std::accumulate(c.begin(), c.end(), 0.0) / static_cast<double>(c.size());
}

inline double average_path_length(const Topology& t) {
  const auto comp = largest_component(t);
  if (comp.size() < 2) return 0.0;
  std::uint64_t total = 0;
  for (auto v : comp) {
    const auto dist = bfs_distances(t, v);
    for (auto w : comp) total += dist[w];
  }
  const double pairs = static_cast<double>(comp.size()) * static_cast<double>(comp.size() - 1);
  return static_cast<double>(total) / pairs;
}

inline ClusteringPath clustering_and_path(const Topology& t) { return {average_clustering(t), average_path_length(t)}; }

// ---------------------------------------------------------------------------------------------
// Small-world index

/// Uniform draw in [0, bound) from raw generator output, identical on every platform.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  while (true) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

/// Ring lattice: each node joined to its `k / 2` nearest neighbors on either side.
inline Topology ring_lattice(std::size_t n, std::size_t k) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (n > 1)
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t s = 1; s <= k / 2; ++s) edges.emplace_back(v, (v + s) % n);
  return Topology::from_edges(n, edges);
}

/// Uniform random graph with exactly min(m, n(n-1)/2) edges.
inline Topology random_gnm(std::size_t n, std::size_t m, std::mt19937_64& rng) {
  const std::uint64_t max_edges = n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
  m = static_cast<std::size_t>(std::min<std::uint64_t>(m, max_edges));
  auto decode = [n](std::uint64_t code) {
    // code enumerates pairs (a < b) row by row
    std::size_t a = 0;
    std::uint64_t row = n - 1;
    while (code >= row) {
      code -= row;
      ++a;
      --row;
    }
    return std::pair<std::size_t, std::size_t>{a, a + 1 + static_cast<std::size_t>(code)};
  };
  const bool sample_complement = m > max_edges / 2;
  const std::uint64_t draws = sample_complement ? max_edges - m : m;
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::uint64_t> order;
  while (chosen.size() < draws) {
    const auto code = bounded_draw(rng, max_edges);
    if (chosen.insert(code).second) order.push_back(code);
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (sample_complement) {
    for (std::uint64_t code = 0; code < max_edges; ++code)
      if (!chosen.count(code)) edges.push_back(decode(code));
  } else {
    for (auto code : order) edges.push_back(decode(code));
  }
  return Topology::from_edges(n, edges);
}

struct SwiReference {
  double lattice_clustering = 0.0;  // C_l
  double lattice_path = 0.0;        // L_l
  double random_clustering = 0.0;   // C_r
  double random_path = 0.0;         // L_r
  std::size_t lattice_degree = 0;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct SwiResult {
  double clustering = 0.0;  // C
  double path_length = 0.0; // L
  SwiReference reference;
  std::optional<double> value;  // empty when a denominator factor vanishes
};

/// ((L - L_l)(C - C_r)) / ((L_r - L_l)(C_l - C_r)); empty when L_r == L_l or C_l == C_r.
inline std::optional<double> small_world_index(double C, double L, double C_l, double L_l, double C_r, double L_r) {
  if (L_r == L_l || C_l == C_r) return std::nullopt;
  return ((L - L_l) * (C - C_r)) / ((L_r - L_l) * (C_l - C_r));
}

/// Mean degree rounded to the nearest even number, capped by what n nodes allow.
inline std::size_t lattice_degree_for(std::size_t n, std::size_t m) {
  if (n < 2) return 0;
  const double mean = 2.0 * static_cast<double>(m) / static_cast<double>(n);
  auto k = static_cast<std::size_t>(2 * std::llround(mean / 2.0));
  std::size_t cap = n - 1;
  if (cap % 2 == 1) --cap;
  return std::min(k, cap);
}

inline SwiReference swi_reference(std::size_t n, std::size_t m, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw ConfigError("small-world index needs at least one random sample");
  SwiReference ref;
  ref.samples = samples;
  ref.seed = seed;
  ref.lattice_degree = lattice_degree_for(n, m);
  const auto lattice = ring_lattice(n, ref.lattice_degree);
  ref.lattice_clustering = average_clustering(lattice);
  ref.lattice_path = average_path_length(lattice);
  std::mt19937_64 rng(seed);
  double c_sum = 0.0, l_sum = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const auto g = random_gnm(n, m, rng);
    c_sum += average_clustering(g);
    l_sum += average_path_length(g);
  }
  ref.random_clustering = c_sum / static_cast<double>(samples);
  ref.random_path = l_sum / static_cast<double>(samples);
  return ref;
}

inline SwiResult small_world_index(const Topology& t, std::size_t samples, std::uint64_t seed) {
  SwiResult r;
  const auto cp = clustering_and_path(t);
  r.clustering = cp.clustering;
  r.path_length = cp.path_length;
  r.reference = swi_reference(t.node_count(), t.edge_count(), samples, seed);
  const auto& ref = r.reference;
  r.value = small_world_index(r.clustering, r.path_length, ref.lattice_clustering, ref.lattice_path,
                              ref.random_clustering, ref.random_path);
  return r;
}

// ---------------------------------------------------------------------------------------------
// Degree distribution

using DegreeHistogram = std::map<std::uint64_t, std::uint64_t>;  // degree -> node count

inline DegreeHistogram degree_histogram(const Topology& t) {
  DegreeHistogram h;
  for (std::size_t v = 0; v < t.node_count(); ++v) ++h[t.degree(v)];
  return h;
}

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least squares of log10(count) on log10(degree) over positive degrees with nonzero count.
inline PowerLawFit powerlaw_fit(const DegreeHistogram& hist) {
  std::vector<double> xs, ys;
  for (auto [k, count] : hist)
    if (k > 0 && count > 0) {
      xs.push_back(std::log10(static_cast<double>(k)));
      ys.push_back(std::log10(static_cast<double>(count)));
    }
  if (xs.size() < 2) throw FitUndefined("power-law fit needs at least two distinct positive degrees");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  PowerLawFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += e * e;
  }
  // A flat histogram is fitted exactly by the zero-slope line.
  fit.r_squared = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  return fit;
}

inline PowerLawFit powerlaw_fit(const Topology& t) { return powerlaw_fit(degree_histogram(t)); }

// ---------------------------------------------------------------------------------------------
// Rich club

struct RichClubPoint {
  std::size_t k = 0;
  std::size_t club_nodes = 0;  // nodes with degree >= k
  std::size_t club_edges = 0;  // edges among them
  std::optional<double> phi;   // undefined when fewer than two nodes qualify

  /// Exact integer test for a fully connected club.
  bool complete() const noexcept {
    return club_nodes >= 2 && 2 * static_cast<std::uint64_t>(club_edges) ==
                                  static_cast<std::uint64_t>(club_nodes) * (club_nodes - 1);
  }
};

struct RichClub {
  std::vector<RichClubPoint> curve;  // k = 0 .. max degree
  std::optional<std::size_t> cutoff_degree;  // minimum k with phi(k) = 1
  std::optional<double> r_fc;                // club size at the cutoff / N
};

/// phi(k) = 2 E_k / (N_k (N_k - 1)) over the nodes of degree >= k.
inline RichClub rich_club(const Topology& t) {
  RichClub rc;
  const std::size_t n = t.node_count();
  std::size_t max_degree = 0;
  for (std::size_t v = 0; v < n; ++v) max_degree = std::max(max_degree, t.degree(v));
  if (n == 0) return rc;
  for (std::size_t k = 0; k <= max_degree; ++k) {
    RichClubPoint p;
    p.k = k;
    for (std::size_t v = 0; v < n; ++v) {
      if (t.degree(v) < k) continue;
      ++p.club_nodes;
      for (auto w : t.adj[v])
        if (w > v && t.degree(w) >= k) ++p.club_edges;
    }
    if (p.club_nodes >= 2)
      p.phi = 2.0 * static_cast<double>(p.club_edges) /
              (static_cast<double>(p.club_nodes) * static_cast<double>(p.club_nodes - 1));
    if (!rc.cutoff_degree && p.complete()) {
      rc.cutoff_degree = k;
      rc.r_fc = static_cast<double>(p.club_nodes) / static_cast<double>(n);
    }
    rc.curve.push_back(p);
  }
  return rc;
}

// ---------------------------------------------------------------------------------------------
// Centralities

struct NodeCentrality {
  std::string node;
  std::size_t degree = 0;
  std::uint64_t weighted_degree = 0;
  double closeness = 0.0;    // 1 / sum of distances to reachable nodes; 0 when isolated
  double betweenness = 0.0;  // unnormalized, over unordered pairs
  bool reaches_all = true;   // false when some node is unreachable (excluded from closeness)
};

/// Degree, weighted degree, closeness and Brandes betweenness for every node.
inline std::vector<NodeCentrality> centralities(const Topology& t) {
  const std::size_t n = t.node_count();
  std::vector<NodeCentrality> out(n);
  std::vector<double> between(n, 0.0);
  std::vector<std::size_t> dist(n);
  std::vector<double> sigma(n), delta(n);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kUnreachable);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    dist[s] = 0;
    sigma[s] = 1.0;
    std::deque<std::size_t> queue{s};
    while (!queue.empty()) {
      const auto v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (auto w : t.adj[v]) {
        if (dist[w] == kUnreachable) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = *it;
      for (auto v : t.adj[w])
        if (dist[v] + 1 == dist[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) between[w] += delta[w];
    }
    std::uint64_t total = 0;
    for (auto v : order) total += dist[v];
    auto& c = out[s];
    c.node = t.ids[s];
    c.degree = t.degree(s);
    c.weighted_degree = std::accumulate(t.weights[s].begin(), t.weights[s].end(), std::uint64_t{0});
    c.closeness = total == 0 ? 0.0 : 1.0 / static_cast<double>(total);
    c.reaches_all = order.size() == n;
  }
  for (std::size_t v = 0; v < n; ++v) out[v].betweenness = between[v] / 2.0;
  return out;
}

// ---------------------------------------------------------------------------------------------
// Stage growth

struct StageStats {
  int stage = 0;
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double average_degree = 0.0;
  double density = 0.0;
  double path_length = 0.0;
  double clustering = 0.0;
};

inline StageStats stage_stats(const SocialGraph& g) {
  const auto t = Topology::from(g);
  StageStats s;
  s.stage = g.stage.value_or(0);
  s.nodes = t.node_count();
  s.edges = t.edge_count();
  if (s.nodes > 0) s.average_degree = 2.0 * static_cast<double>(s.edges) / static_cast<double>(s.nodes);
  if (s.nodes > 1)
    s.density = 2.0 * static_cast<double>(s.edges) / (static_cast<double>(s.nodes) * static_cast<double>(s.nodes - 1));
  const auto cp = clustering_and_path(t);
  s.path_length = cp.path_length;
  s.clustering = cp.clustering;
  return s;
}

/// Mean of stage-over-stage node-count increases, in percent; stages starting from zero nodes
/// are skipped. Empty when no step qualifies.
inline std::optional<double> average_node_growth(const std::vector<StageStats>& stages) {
  double sum = 0.0;
  std::size_t steps = 0;
  for (std::size_t i = 1; i < stages.size(); ++i) {
    if (stages[i - 1].nodes == 0) continue;
    sum += 100.0 * (static_cast<double>(stages[i].nodes) - static_cast<double>(stages[i - 1].nodes)) /
           static_cast<double>(stages[i - 1].nodes);
    ++steps;
  }
  if (steps == 0) return std::nullopt;
  return sum / static_cast<double>(steps);
}

// ---------------------------------------------------------------------------------------------
// Report

struct MetricReport {
  BasicStats basic;
  SwiResult swi;
  std::optional<PowerLawFit> powerlaw;
  RichClub rich_club;
  std::vector<NodeCentrality> nodes;
};

/// With `swi_samples == 0` the small-world reference is skipped and its value left empty.
inline MetricReport compute_report(const SocialGraph& g, std::size_t swi_samples, std::uint64_t seed) {
  const auto t = Topology::from(g);
  MetricReport r;
  r.basic = basic_stats(t);
  if (swi_samples > 0) {
    r.swi = small_world_index(t, swi_samples, seed);
  } else {
    const auto cp = clustering_and_path(t);
    r.swi.clustering = cp.clustering;
    r.swi.path_length = cp.path_length;
  }
  try {
    r.powerlaw = powerlaw_fit(t);
  } catch (const FitUndefined&) {
  }
  r.rich_club = rich_club(t);
  r.nodes = centralities(t);
  return r;
}

namespace detail {
inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
}  // namespace detail

inline nlohmann::ordered_json to_ordered_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["N"] = r.basic.nodes;
  j["E"] = r.basic.edges;
  j["diameter"] = r.basic.diameter;
  j["edgeless"] = r.basic.edgeless;
  j["avg_clustering"] = r.swi.clustering;
  j["avg_path_length"] = r.swi.path_length;
  nlohmann::ordered_json swi;
  swi["value"] = detail::opt_json(r.swi.value);
  swi["C_l"] = r.swi.reference.lattice_clustering;
  swi["L_l"] = r.swi.reference.lattice_path;
  swi["C_r"] = r.swi.reference.random_clustering;
  swi["L_r"] = r.swi.reference.random_path;
  swi["lattice_degree"] = r.swi.reference.lattice_degree;
  swi["samples"] = r.swi.reference.samples;
  swi["seed"] = r.swi.reference.seed;
  j["swi"] = swi;
  if (r.powerlaw)
    j["powerlaw"] = {{"slope", r.powerlaw->slope}, {"intercept", r.powerlaw->intercept},
                     {"r_squared", r.powerlaw->r_squared}};
  else
    j["powerlaw"] = nullptr;
  nlohmann::ordered_json rc;
  rc["cutoff_degree"] = r.rich_club.cutoff_degree ? nlohmann::ordered_json(*r.rich_club.cutoff_degree) : nullptr;
  rc["r_fc"] = detail::opt_json(r.rich_club.r_fc);
  rc["phi"] = nlohmann::ordered_json::array();
  for (const auto& p : r.rich_club.curve) {
    nlohmann::ordered_json pj;
    pj["k"] = p.k;
    pj["phi"] = detail::opt_json(p.phi);
    rc["phi"].push_back(pj);
  }
  j["rich_club"] = rc;
  j["nodes"] = nlohmann::ordered_json::array();
  for (const auto& c : r.nodes) {
    nlohmann::ordered_json cj;
    cj["node"] = c.node;
    cj["degree"] = c.degree;
    cj["weighted_degree"] = c.weighted_degree;
    cj["closeness"] = c.closeness;
    cj["betweenness"] = c.betweenness;
    cj["reaches_all"] = c.reaches_all;
    j["nodes"].push_back(cj);
  }
  return j;
}

inline nlohmann::ordered_json to_ordered_json(const StageStats& s) {
  nlohmann::ordered_json j;
  j["stage"] = s.stage;
  j["nodes"] = s.nodes;
  j["edges"] = s.edges;
  j["average_degree"] = s.average_degree;
  j["density"] = s.density;
  j["avg_path_length"] = s.path_length;
  j["avg_clustering"] = s.clustering;
  return j;
}

inline std::string centralities_csv(const std::vector<NodeCentrality>& nodes) {
  std::ostringstream o;
  o.precision(17);
  o << "node,degree,weighted_degree,closeness,betweenness\n";
  for (const auto& c : nodes) {
    std::string id = c.node;
    if (id.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char ch : id) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      id = q + "\"";
    }
    o << id << ',' << c.degree << ',' << c.weighted_degree << ',' << c.closeness << ',' << c.betweenness << '\n';
  }
  return o.str();
}

inline std::string rich_club_csv(const RichClub& rc) {
  std::ostringstream o;
  o.precision(17);
  o << "k,phi\n";
  for (const auto& p : rc.curve) {
    o << p.k << ',';
    if (p.phi) o << *p.phi;
    o << '\n';
  }
  return o.str();
}

}  // namespace narrative_net
