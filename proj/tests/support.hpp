#pragma once

// Shared test helpers. The oracles here are deliberately naive re-derivations
// of each contract; they share no code with the library beyond plain data
// types, so agreement between the two means something.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "excavator/artifacts.hpp"
#include "excavator/pipeline.hpp"

#ifndef EXCAVATOR_SOURCE_DIR
#error "EXCAVATOR_SOURCE_DIR must be defined by the build"
#endif

namespace testing_support {

using nlohmann::json;
using namespace excavator;

inline std::string source_path(const std::string& rel) { return std::string(EXCAVATOR_SOURCE_DIR) + "/" + rel; }

inline std::string scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("excavator-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

// The configuration the goldens under tests/data/golden were produced with.
inline PipelineConfig fixture_config(const std::string& out_dir = {}) {
  PipelineConfig cfg;
  cfg.inputs = {source_path("data/corpus/fixture.jsonl")};
  cfg.taxonomy_path = source_path("data/taxonomy.txt");
  cfg.lexicon_path = source_path("data/lexicon.tsv");
  cfg.gazetteer_path = source_path("data/gazetteer.tsv");
  cfg.patterns_path = source_path("data/patterns.txt");
  cfg.argument_training_path = source_path("data/train/arguments.jsonl");
  cfg.relation_training_path = source_path("data/train/relations.jsonl");
  cfg.out_dir = out_dir;
  return cfg;
}

// ---------------------------------------------------------------------------
// Minimal JSON Schema validator for docs/schemas.json. Returns the first
// violation as "path: reason", or nothing.

class SchemaValidator {
 public:
  explicit SchemaValidator(json root) : root_(std::move(root)) {}

  static SchemaValidator load() { return SchemaValidator(json::parse(read_file(source_path("docs/schemas.json")))); }

  std::optional<std::string> validate(const json& value, const std::string& def) const {
    return check(value, root_.at("$defs").at(def), "$");
  }

 private:
  const json& resolve(const json& schema) const {
    if (!schema.contains("$ref")) return schema;
    auto ref = schema.at("$ref").get<std::string>();
    const std::string prefix = "#/$defs/";
    return root_.at("$defs").at(ref.substr(prefix.size()));
  }

  static bool has_type(const json& v, const std::string& t) {
    if (t == "null") return v.is_null();
    if (t == "boolean") return v.is_boolean();
    if (t == "integer") return v.is_number_integer();
    if (t == "number") return v.is_number();
    if (t == "string") return v.is_string();
    if (t == "array") return v.is_array();
    if (t == "object") return v.is_object();
    return false;
  }

  std::optional<std::string> check(const json& v, const json& raw, const std::string& path) const {
    const json& s = resolve(raw);
    if (s.contains("anyOf")) {
      for (const auto& alt : s.at("anyOf"))
        if (!check(v, alt, path)) return std::nullopt;
      return path + ": matches no alternative";
    }
    if (s.contains("type")) {
      std::vector<std::string> types;
      if (s.at("type").is_array())
        types = s.at("type").get<std::vector<std::string>>();
      else
        types = {s.at("type").get<std::string>()};
      if (std::none_of(types.begin(), types.end(), [&](const std::string& t) { return has_type(v, t); }))
        return path + ": wrong type " + std::string(v.type_name());
    }
    if (s.contains("const") && v != s.at("const")) return path + ": expected " + s.at("const").dump();
    if (s.contains("enum")) {
      const auto& e = s.at("enum");
      if (std::find(e.begin(), e.end(), v) == e.end()) return path + ": " + v.dump() + " not in enum";
    }
    if (s.contains("pattern") && v.is_string() &&
        !std::regex_match(v.get<std::string>(), std::regex(s.at("pattern").get<std::string>())))
      return path + ": does not match pattern";
    if (v.is_number()) {
      if (s.contains("minimum") && v.get<double>() < s.at("minimum").get<double>()) return path + ": below minimum";
      if (s.contains("maximum") && v.get<double>() > s.at("maximum").get<double>()) return path + ": above maximum";
    }
    if (v.is_array()) {
      if (s.contains("minItems") && v.size() < s.at("minItems").get<std::size_t>()) return path + ": too few items";
      if (s.contains("maxItems") && v.size() > s.at("maxItems").get<std::size_t>()) return path + ": too many items";
      if (s.contains("items"))
        for (std::size_t i = 0; i < v.size(); ++i)
          if (auto err = check(v[i], s.at("items"), path + "[" + std::to_string(i) + "]")) return err;
    }
    if (v.is_object()) {
      if (s.contains("required"))
        for (const auto& k : s.at("required"))
          if (!v.contains(k.get<std::string>())) return path + ": missing " + k.get<std::string>();
      const json empty = json::object();
      const json& props = s.contains("properties") ? s.at("properties") : empty;
      for (const auto& [k, child] : v.items()) {
        if (props.contains(k)) {
          if (auto err = check(child, props.at(k), path + "." + k)) return err;
        } else if (s.contains("additionalProperties")) {
          const auto& ap = s.at("additionalProperties");
          if (ap.is_boolean() && !ap.get<bool>()) return path + ": unexpected key " + k;
          if (ap.is_object())
            if (auto err = check(child, ap, path + "." + k)) return err;
        }
      }
    }
    return std::nullopt;
  }

  json root_;
};

// ---------------------------------------------------------------------------
// Oracles

namespace oracle {

inline std::pair<int, int> next_month(std::pair<int, int> ym) {
  return ym.second == 12 ? std::pair{ym.first + 1, 1} : std::pair{ym.first, ym.second + 1};
}

inline std::pair<int, int> prev_month(std::pair<int, int> ym) {
  return ym.second == 1 ? std::pair{ym.first - 1, 12} : std::pair{ym.first, ym.second - 1};
}

// Popularity formula evaluated literally, month by month, with the edge
// policy spelled out: window months outside [from, to] or without articles
// are left out, and the mean divides by what is left (or by T when strict).
inline std::vector<std::pair<std::pair<int, int>, double>> popularity(
    const std::map<std::pair<int, int>, std::size_t>& n, const std::map<std::pair<int, int>, std::size_t>& articles,
    std::pair<int, int> from, std::pair<int, int> to, int T, bool strict) {
  std::vector<std::pair<std::pair<int, int>, double>> out;
  auto lookup = [](const auto& m, std::pair<int, int> k) -> std::size_t {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  };
  for (auto t = from; t <= to; t = next_month(t)) {
    std::vector<std::pair<int, int>> window;
    auto start = t;
    for (int k = 0; k < T / 2; ++k) start = prev_month(start);
    auto cur = start;
    for (int k = 0; k < T; ++k, cur = next_month(cur)) window.push_back(cur);
    double sum = 0.0;
    int used = 0;
    for (auto w : window) {
      if (w < from || w > to) continue;
      const std::size_t a = lookup(articles, w);
      if (a == 0) continue;
      const double M = static_cast<double>(a) / 500.0;
      sum += static_cast<double>(lookup(n, w)) / M;
      ++used;
    }
    if (used == 0) continue;
    out.push_back({t, sum / (strict ? T : used)});
  }
  return out;
}

// Best label sequence by enumerating all L^n sequences. Each path is scored
// as ((t0 + e0) + t1) + e1 ... . Ties: compare paths from the last position
// backwards and take the smaller label index.
inline std::vector<std::size_t> argmax_sequence(const std::vector<std::vector<double>>& trans,
                                                const std::vector<std::vector<double>>& emit) {
  const std::size_t n = emit.size();
  const std::size_t L = trans.front().size();
  std::vector<std::size_t> path(n, 0), best;
  double best_score = -INFINITY;
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= L;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    for (std::size_t i = 0; i < n; ++i) {
      path[i] = c % L;
      c /= L;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s = s + trans[i == 0 ? 0 : path[i - 1] + 1][path[i]];
      s = s + emit[i][path[i]];
    }
    bool take = best.empty() || s > best_score;
    if (!take && s == best_score) {
      std::vector<std::size_t> a(path.rbegin(), path.rend()), b(best.rbegin(), best.rend());
      take = a < b;
    }
    if (take) {
      best = path;
      best_score = s;
    }
  }
  return best;
}

// Re-parses pattern lines with regular expressions and matches them against
// every ordered mention pair by direct comparison. Returns the multiset of
// (left id, right id, subtype name).
struct RawPattern {
  bool lexical = true;
  std::vector<std::string> words;  // lexical: template words, lowercased, slots kept as X / Y
  std::string lemma;
  std::vector<std::pair<std::string, char>> roles;
  std::string subtype;
  bool reverse = false;
};

inline std::vector<RawPattern> parse_patterns(const std::string& text) {
  static const std::regex lex(R"(^lexical:\s*(.*?)\s*=>\s*(\w+)(\s+reverse)?\s*$)");
  static const std::regex prop(R"(^prop:\s*(?:verb:)?(\w+)\s*((?:\[\w+=[XY]\])+)\s*=>\s*(\w+)(\s+reverse)?\s*$)");
  static const std::regex role(R"(\[(\w+)=([XY])\])");
  std::vector<RawPattern> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::smatch m;
    RawPattern p;
    if (std::regex_match(line, m, lex)) {
      std::istringstream ws(m[1].str());
      std::string w;
      while (ws >> w) p.words.push_back(w == "X" || w == "Y" ? w : to_lower(w));
      p.subtype = m[2].str();
      p.reverse = m[3].matched;
    } else if (std::regex_match(line, m, prop)) {
      p.lexical = false;
      p.lemma = m[1].str();
      const std::string roles = m[2].str();
      for (auto it = std::sregex_iterator(roles.begin(), roles.end(), role); it != std::sregex_iterator(); ++it)
        p.roles.push_back({(*it)[1].str(), (*it)[2].str()[0]});
      p.subtype = m[3].str();
      p.reverse = m[4].matched;
    } else {
      continue;
    }
    out.push_back(std::move(p));
  }
  return out;
}

using RelationKey = std::tuple<std::string, std::string, std::string>;

inline std::vector<RelationKey> match_patterns(const Sentence& s, const std::vector<EventMention>& events,
                                               const std::vector<RawPattern>& patterns,
                                               const PropositionGraph& props) {
  std::vector<RelationKey> out;
  std::vector<std::string> low;
  for (const auto& t : s.tokens) low.push_back(to_lower(t.text));
  for (const auto& x : events)
    for (const auto& y : events) {
      if (x.id == y.id || x.sentence_index != s.index || y.sentence_index != s.index) continue;
      for (const auto& p : patterns) {
        bool hit = false;
        if (p.lexical) {
          std::vector<std::string> expanded;
          for (const auto& w : p.words) {
            const EventMention* e = w == "X" ? &x : w == "Y" ? &y : nullptr;
            if (!e) {
              expanded.push_back(w);
              continue;
            }
            for (auto i = e->trigger_span.begin; i < e->trigger_span.end; ++i) expanded.push_back(low[i]);
          }
          const auto& first = p.words.front() == "X" ? x : y;
          const auto& last = p.words.front() == "X" ? y : x;
          if (first.trigger_span.begin < last.trigger_span.end) {
            std::vector<std::string> window(low.begin() + static_cast<long>(first.trigger_span.begin),
                                            low.begin() + static_cast<long>(last.trigger_span.end));
            hit = window == expanded;
          }
        } else {
          std::set<std::pair<std::size_t, std::size_t>> preds;
          for (const auto& t : props)
            if (t.lemma == p.lemma) preds.insert({t.predicate.begin, t.predicate.end});
          for (auto [pb, pe] : preds) {
            bool all = true;
            for (auto [r, slot] : p.roles) {
              const auto& ev = slot == 'X' ? x : y;
              bool found = false;
              for (const auto& t : props)
                if (t.predicate.begin == pb && t.predicate.end == pe && t.role == r &&
                    t.argument.begin < ev.trigger_span.end && ev.trigger_span.begin < t.argument.end)
                  found = true;
              all = all && found;
            }
            if (all) hit = true;
          }
        }
        if (!hit) continue;
        if (p.reverse)
          out.emplace_back(y.id, x.id, p.subtype);
        else
          out.emplace_back(x.id, y.id, p.subtype);
      }
    }
  return out;
}

// Every set of non-overlapping labeled spans over n tokens.
inline void all_span_sets(std::size_t n, const std::vector<std::string>& types, std::size_t i,
                          std::vector<LabeledSpan>& cur, std::vector<std::vector<LabeledSpan>>& out) {
  if (i >= n) {
    out.push_back(cur);
    return;
  }
  all_span_sets(n, types, i + 1, cur, out);
  for (std::size_t len = 1; i + len <= n; ++len)
    for (const auto& t : types) {
      cur.push_back({{i, i + len}, t});
      all_span_sets(n, types, i + len, cur, out);
      cur.pop_back();
    }
}

inline std::vector<std::vector<LabeledSpan>> all_span_sets(std::size_t n, const std::vector<std::string>& types) {
  std::vector<std::vector<LabeledSpan>> out;
  std::vector<LabeledSpan> cur;
  all_span_sets(n, types, 0, cur, out);
  return out;
}

template <typename Rng>
std::vector<LabeledSpan> random_span_set(std::size_t n, const std::vector<std::string>& types, Rng& rng) {
  std::vector<LabeledSpan> out;
  std::size_t i = 0;
  while (i < n) {
    if (rng() % 3 == 0) {
      ++i;
      continue;
    }
    std::size_t len = 1 + rng() % std::min<std::size_t>(3, n - i);
    out.push_back({{i, i + len}, types[rng() % types.size()]});
    i += len;
  }
  return out;
}

// Brute-force TCAG recount: node and relation-edge counts keyed by strings.
struct Recount {
  std::map<std::string, std::size_t> nodes;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> edges;  // (kind, left, right)
  std::set<std::pair<std::string, std::string>> isa;
};

inline Recount recount(const std::vector<EventMention>& mentions, const std::vector<RelationMention>& relations,
                       const Taxonomy& tax, const std::optional<std::string>& geo, const std::optional<YearMonth>& month,
                       std::size_t min_count, bool strict, bool rollup = false) {
  Recount rc;
  std::map<std::string, std::string> kept;
  for (const auto& m : mentions) {
    bool ok = true;
    if (geo) {
      if (m.geo.has_value())
        ok = ok && *m.geo == *geo;
      else
        ok = ok && !strict;
    }
    if (month) {
      if (m.month.has_value())
        ok = ok && *m.month == *month;
      else
        ok = ok && !strict;
    }
    if (!ok) continue;
    kept[m.id] = m.event_type;
    rc.nodes[m.event_type] += 1;
    if (!rollup) continue;
    // walk parents breadth-first, counting each ancestor once
    std::set<std::string> seen;
    std::vector<std::string> frontier = tax.at(m.event_type).parents;
    while (!frontier.empty()) {
      auto t = frontier.back();
      frontier.pop_back();
      if (!seen.insert(t).second) continue;
      rc.nodes[t] += 1;
      for (const auto& p : tax.at(t).parents) frontier.push_back(p);
    }
  }
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> all;
  for (const auto& r : relations) {
    if (!kept.count(r.left_event) || !kept.count(r.right_event)) continue;
    std::string kind = r.type == RelationType::Causes ? "Causes" : r.type == RelationType::Mitigates ? "Mitigates" : "Before";
    all[{kind, kept[r.left_event], kept[r.right_event]}] += 1;
  }
  for (const auto& [k, c] : all)
    if (c >= min_count) rc.edges[k] = c;
  for (const auto& [a, ca] : rc.nodes)
    for (const auto& [b, cb] : rc.nodes)
      for (const auto& p : tax.at(a).parents)
        if (p == b) rc.isa.insert({a, b});
  return rc;
}

}  // namespace oracle
}  // namespace testing_support
