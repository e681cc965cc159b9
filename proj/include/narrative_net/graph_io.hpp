#pragma once

// GEXF 1.3 and CSV edge-list serialization of SocialGraph.

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "narrative_net/error.hpp"
#include "narrative_net/social_graph.hpp"
#include "narrative_net/text_util.hpp"

namespace narrative_net {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Undirected static GEXF with a `degree` node attribute, viz:size = degree + 1 and edge weights.
inline std::string to_gexf(const SocialGraph& g) {
  const auto deg = g.degrees();
  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<gexf xmlns=\"http://gexf.net/1.3\" xmlns:viz=\"http://gexf.net/1.3/viz\" version=\"1.3\">\n"
    << "  <meta>\n    <creator>narrative-net</creator>\n";
  if (!g.source.empty() || g.stage)
    o << "    <description>" << xml_escape(g.source)
      << (g.stage ? (g.source.empty() ? "stage " : " stage ") + std::to_string(*g.stage) : "") << "</description>\n";
  o << "  </meta>\n"
    << "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n"
    << "    <attributes class=\"node\">\n"
    << "      <attribute id=\"degree\" title=\"degree\" type=\"integer\"/>\n"
    << "    </attributes>\n"
    << "    <nodes>\n";
  for (const auto& [id, label] : g.nodes()) {
    const auto d = deg.at(id);
    o << "      <node id=\"" << xml_escape(id) << "\" label=\"" << xml_escape(label) << "\">\n"
      << "        <attvalues><attvalue for=\"degree\" value=\"" << d << "\"/></attvalues>\n"
      << "        <viz:size value=\"" << (d + 1) << "\"/>\n"
      << "      </node>\n";
  }
  o << "    </nodes>\n    <edges>\n";
  std::size_t eid = 0;
  for (const auto& [e, w] : g.edges())
    o << "      <edge id=\"" << eid++ << "\" source=\"" << xml_escape(e.first) << "\" target=\""
      << xml_escape(e.second) << "\" weight=\"" << w << "\"/>\n";
  o << "    </edges>\n  </graph>\n</gexf>\n";
  return o.str();
}

inline SocialGraph from_gexf(const std::string& xml, const std::string& origin = "gexf") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw DataError(origin + ": " + e.what());
  }
  SocialGraph g;
  try {
    const auto& graph = tree.get_child("gexf.graph");
    if (auto nodes = graph.get_child_optional("nodes"))
      for (const auto& [tag, node] : *nodes)
        if (tag == "node") {
          const auto id = node.get<std::string>("<xmlattr>.id");
          g.add_node(id, node.get<std::string>("<xmlattr>.label", id));
        }
    if (auto edges = graph.get_child_optional("edges"))
      for (const auto& [tag, edge] : *edges)
        if (tag == "edge") {
          const auto w = static_cast<std::uint64_t>(edge.get<double>("<xmlattr>.weight", 1.0));
          g.add_interaction(edge.get<std::string>("<xmlattr>.source"), edge.get<std::string>("<xmlattr>.target"), w);
        }
  } catch (const pt::ptree_error& e) {
    throw DataError(origin + ": not a GEXF graph: " + e.what());
  }
  g.source = origin;
  return g;
}

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Splits one CSV record honoring double-quoted fields.
inline std::vector<std::string> parse_csv_record(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

inline std::string to_edge_csv(const SocialGraph& g) {
  std::string out = "source,target,weight\n";
  for (const auto& [e, w] : g.edges()) out += csv_field(e.first) + "," + csv_field(e.second) + "," + std::to_string(w) + "\n";
  return out;
}

/// Isolated nodes are not representable in an edge list and are lost.
inline SocialGraph from_edge_csv(std::string_view text, const std::string& origin = "csv") {
  SocialGraph g;
  std::size_t line_no = 0;
  for (auto line : split_lines(text)) {
    ++line_no;
    if (is_blank(line) || (line_no == 1 && line.rfind("source,", 0) == 0)) continue;
    const auto f = parse_csv_record(line);
    if (f.size() != 3) throw DataError(origin + ":" + std::to_string(line_no) + ": expected source,target,weight");
    try {
      g.add_interaction(f[0], f[1], std::stoull(f[2]));
    } catch (const std::logic_error&) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": bad weight '" + f[2] + "'");
    }
  }
  g.source = origin;
  return g;
}

inline SocialGraph load_graph(const std::string& path) {
  const auto text = read_file(path);
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return from_edge_csv(text, path);
  return from_gexf(text, path);
}

}  // namespace narrative_net
