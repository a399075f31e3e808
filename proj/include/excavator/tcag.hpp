#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "excavator/common.hpp"
#include "excavator/event_extraction.hpp"
#include "excavator/relation_extraction.hpp"
#include "excavator/taxonomy.hpp"

namespace excavator {

inline constexpr std::string_view kTcagSchema = "tcag/1";

struct FilterSpec {
  std::optional<std::string> geo{};
  std::optional<YearMonth> month{};
  std::size_t min_edge_count = 1;
  // Strict: a geo/month filter also drops mentions that lack the attribute.
  bool strict = false;
  // Count every mention toward its type's ancestors as well.
  bool ancestor_rollup = false;

  bool operator==(const FilterSpec&) const = default;
};

enum class EdgeKind { Causes, Mitigates, Before, IsA };

inline std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Causes: return "Causes";
    case EdgeKind::Mitigates: return "Mitigates";
    case EdgeKind::Before: return "Before";
    case EdgeKind::IsA: return "IsA";
  }
  return "";
}

inline std::optional<EdgeKind> parse_edge_kind(std::string_view s) {
  for (auto k : {EdgeKind::Causes, EdgeKind::Mitigates, EdgeKind::Before, EdgeKind::IsA})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline EdgeKind edge_kind_of(RelationType t) {
  switch (t) {
    case RelationType::Causes: return EdgeKind::Causes;
    case RelationType::Mitigates: return EdgeKind::Mitigates;
    case RelationType::Before: return EdgeKind::Before;
  }
  return EdgeKind::Causes;
}

// Display scale for node sizes and edge widths: ln(1 + count).
// 1 + count is exact, and log rounds better than log1p here.
inline double log_scale(std::size_t count) { return std::log(1.0 + static_cast<double>(count)); }

struct TcagNode {
  std::string event_type;
  std::size_t mention_count = 0;
  double display_size = 0.0;
};

struct TcagEdge {
  EdgeKind kind = EdgeKind::Causes;
  std::string left;
  std::string right;
  std::size_t count = 0;
  double display_thickness = 0.0;

  bool dashed() const noexcept { return kind == EdgeKind::IsA; }
};

struct Tcag {
  std::vector<TcagNode> nodes;  // sorted by type name
  std::vector<TcagEdge> edges;  // sorted by (kind, left, right)
  FilterSpec filter;
  std::string generated_at;
  std::string corpus_version;

  const TcagNode* node(std::string_view type) const {
    for (const auto& n : nodes)
      if (n.event_type == type) return &n;
    return nullptr;
  }
};

inline bool mention_passes(const EventMention& m, const FilterSpec& f) {
  if (f.geo) {
    if (m.geo ? *m.geo != *f.geo : f.strict) return false;
  }
  if (f.month) {
    if (m.month ? *m.month != *f.month : f.strict) return false;
  }
  return true;
}

// Aggregates mentions into one node per event type and relations into one
// edge per (relation type, left type, right type), after dropping mentions
// that fail the filter and relations with a dropped endpoint. Relation edges
// under min_edge_count are removed; dashed IsA edges link present nodes to
// their present direct parents.
inline Tcag build_tcag(std::span<const EventMention> mentions, std::span<const RelationMention> relations,
                       const Taxonomy& taxonomy, const FilterSpec& filter) {
  Tcag g;
  g.filter = filter;

  std::map<std::string, std::string> surviving;  // mention id -> type
  std::map<std::string, std::size_t> node_counts;
  for (const auto& m : mentions) {
    if (!mention_passes(m, filter)) continue;
    surviving.emplace(m.id, m.event_type);
    ++node_counts[m.event_type];
    if (filter.ancestor_rollup && taxonomy.contains(m.event_type))
      for (const auto& a : taxonomy.ancestors(m.event_type)) ++node_counts[a];
  }

  std::map<std::tuple<EdgeKind, std::string, std::string>, std::size_t> edge_counts;
  for (const auto& r : relations) {
    auto l = surviving.find(r.left_event);
    auto rt = surviving.find(r.right_event);
    if (l == surviving.end() || rt == surviving.end()) continue;
    ++edge_counts[{edge_kind_of(r.type), l->second, rt->second}];
  }

  for (const auto& [type, count] : node_counts) g.nodes.push_back({type, count, log_scale(count)});
  for (const auto& [key, count] : edge_counts) {
    if (count < filter.min_edge_count || count == 0) continue;
    const auto& [kind, left, right] = key;
    g.edges.push_back({kind, left, right, count, log_scale(count)});
  }
  for (const auto& [type, count] : node_counts) {
    if (!taxonomy.contains(type)) continue;
    for (const auto& parent : taxonomy.at(type).parents)
      if (node_counts.count(parent)) g.edges.push_back({EdgeKind::IsA, type, parent, 0, 0.0});
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const TcagEdge& a, const TcagEdge& b) {
    return std::tie(a.kind, a.left, a.right) < std::tie(b.kind, b.left, b.right);
  });
  return g;
}

// ---------------------------------------------------------------------------
// Focus coloring

enum class FocusRole { focused, upstream, downstream, neutral };

inline std::string_view to_string(FocusRole r) {
  switch (r) {
    case FocusRole::focused: return "focused";
    case FocusRole::upstream: return "upstream";
    case FocusRole::downstream: return "downstream";
    case FocusRole::neutral: return "neutral";
  }
  return "";
}

inline std::string_view color_of(FocusRole r) {
  switch (r) {
    case FocusRole::focused: return "blue";
    case FocusRole::upstream: return "orange";
    case FocusRole::downstream: return "green";
    case FocusRole::neutral: return "gray";
  }
  return "";
}

// Blue for the focused node, orange for sources of Causes/Mitigates/Before
// edges into it, green for targets of such edges out of it. A node that is
// both upstream and downstream is orange. IsA edges do not color.
inline std::map<std::string, FocusRole> assign_focus_colors(const Tcag& tcag, std::string_view focused) {
  if (!tcag.node(focused)) throw NotFound("tcag", "focused event '" + std::string(focused) + "' is not in the graph");
  std::map<std::string, FocusRole> roles;
  for (const auto& n : tcag.nodes) roles[n.event_type] = FocusRole::neutral;
  for (const auto& e : tcag.edges) {
    if (e.kind == EdgeKind::IsA) continue;
    if (e.right == focused && e.left != focused) roles[e.left] = FocusRole::upstream;
  }
  for (const auto& e : tcag.edges) {
    if (e.kind == EdgeKind::IsA) continue;
    if (e.left == focused && e.right != focused && roles[e.right] != FocusRole::upstream)
      roles[e.right] = FocusRole::downstream;
  }
  roles[std::string(focused)] = FocusRole::focused;
  return roles;
}

// ---------------------------------------------------------------------------
// Export

inline nlohmann::json filter_to_json(const FilterSpec& f) {
  return {{"geo", f.geo ? nlohmann::json(*f.geo) : nlohmann::json(nullptr)},
          {"month", f.month ? nlohmann::json(f.month->str()) : nlohmann::json(nullptr)},
          {"min_edge_count", f.min_edge_count},
          {"strict", f.strict},
          {"ancestor_rollup", f.ancestor_rollup}};
}

inline nlohmann::json tcag_to_json(const Tcag& g, const std::map<std::string, FocusRole>* roles = nullptr) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : g.nodes) {
    nlohmann::json j = {{"event_type", n.event_type}, {"mention_count", n.mention_count}, {"display_size", n.display_size}};
    if (roles) {
      auto role = roles->at(n.event_type);
      j["focus_role"] = to_string(role);
      j["color"] = color_of(role);
    }
    nodes.push_back(std::move(j));
  }
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"kind", to_string(e.kind)},
                     {"left", e.left},
                     {"right", e.right},
                     {"count", e.count},
                     {"display_thickness", e.display_thickness},
                     {"style", e.dashed() ? "dashed" : "solid"}});
  return {{"schema", kTcagSchema},
          {"generated_at", g.generated_at},
          {"corpus_version", g.corpus_version},
          {"filter", filter_to_json(g.filter)},
          {"nodes", std::move(nodes)},
          {"edges", std::move(edges)}};
}

// Canonical bytes: keys sorted (nlohmann objects are ordered maps), nodes
// and edges in their sorted order, two-space indent, trailing newline.
inline std::string export_tcag_json(const Tcag& g) { return tcag_to_json(g).dump(2) + "\n"; }

}  // namespace excavator
