#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "excavator/common.hpp"
#include "excavator/vectors.hpp"

namespace excavator {

struct EventType {
  std::string name;
  std::string description;
  std::vector<std::string> parents;  // is_a, in file order
};

class Taxonomy {
 public:
  Taxonomy() = default;

  const std::string& version() const noexcept { return version_; }
  const std::string& source_text() const noexcept { return source_; }
  const std::map<std::string, EventType>& types() const noexcept { return types_; }
  std::size_t size() const noexcept { return types_.size(); }

  bool contains(std::string_view name) const { return types_.find(std::string(name)) != types_.end(); }

  const EventType& at(std::string_view name) const {
    auto it = types_.find(std::string(name));
    if (it == types_.end()) throw NotFound("taxonomy", "unknown event type '" + std::string(name) + "'");
    return it->second;
  }

  // Transitive closure over is_a, excluding the type itself.
  std::set<std::string> ancestors(std::string_view name) const {
    std::set<std::string> out;
    std::vector<std::string> stack = at(name).parents;
    while (!stack.empty()) {
      auto cur = std::move(stack.back());
      stack.pop_back();
      if (!out.insert(cur).second) continue;
      for (const auto& p : types_.at(cur).parents) stack.push_back(p);
    }
    return out;
  }

  friend Taxonomy parse_taxonomy(std::string_view text);

 private:
  std::string version_;
  std::string source_;
  std::map<std::string, EventType> types_;
};

namespace detail {

inline bool valid_type_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

// Taxonomy files are blocks of
//
//   [TypeName]
//   description: free text
//   parents: ParentA, ParentB
//
// preceded by an optional "version: ..." line. '#' starts a comment line.
inline Taxonomy parse_taxonomy(std::string_view text) {
  Taxonomy tax;
  tax.source_ = std::string(text);
  std::vector<std::string> order;
  EventType* current = nullptr;
  std::size_t lineno = 0;
  for (const auto& raw : split(text, '\n')) {
    ++lineno;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto where = " (line " + std::to_string(lineno) + ")";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error("taxonomy", "unterminated type header" + where);
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (!detail::valid_type_name(name)) throw Error("taxonomy", "invalid type name '" + name + "'" + where);
      if (tax.types_.count(name)) throw Error("taxonomy", "duplicate type '" + name + "'" + where);
      current = &tax.types_[name];
      current->name = name;
      order.push_back(name);
      continue;
    }
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw Error("taxonomy", "expected 'key: value'" + where);
    auto key = trim(line.substr(0, colon));
    auto value = trim(line.substr(colon + 1));
    if (!current) {
      if (key != "version") throw Error("taxonomy", "field '" + std::string(key) + "' outside a type block" + where);
      tax.version_ = std::string(value);
    } else if (key == "description") {
      current->description = std::string(value);
    } else if (key == "parents") {
      for (const auto& p : split(value, ',')) {
        std::string name(trim(p));
        if (!name.empty()) current->parents.push_back(name);
      }
    } else {
      throw Error("taxonomy", "unknown field '" + std::string(key) + "'" + where);
    }
  }

  for (const auto& [name, t] : tax.types_)
    for (const auto& p : t.parents)
      if (!tax.types_.count(p))
        throw Error("taxonomy", "type '" + name + "' names undefined parent '" + p + "'");

  // Cycle check by DFS with colors; the error carries the cycle path.
  std::map<std::string, int> color;
  std::vector<std::string> path;
  auto visit = [&](auto&& self, const std::string& n) -> void {
    color[n] = 1;
    path.push_back(n);
    for (const auto& p : tax.types_.at(n).parents) {
      if (color[p] == 1) {
        auto start = std::find(path.begin(), path.end(), p);
        std::vector<std::string> cycle(start, path.end());
        cycle.push_back(p);
        throw Error("taxonomy", "is_a cycle: " + join(cycle, " -> "));
      }
      if (color[p] == 0) self(self, p);
    }
    path.pop_back();
    color[n] = 2;
  };
  for (const auto& n : order)
    if (color[n] == 0) visit(visit, n);
  return tax;
}

inline Taxonomy load_taxonomy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("taxonomy", "cannot open taxonomy file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_taxonomy(ss.str());
}

// ---------------------------------------------------------------------------
// Committee-based clustering assist for taxonomy authoring.

struct PhraseVector {
  std::string phrase;
  Vector vector;
};

struct ClusterParams {
  double similarity_threshold = 0.5;
  std::size_t committee_min_size = 2;
  std::size_t top_k = 5;
};

struct PhraseCluster {
  Vector centroid;
  std::vector<std::size_t> members;  // indices into the input list, ascending
};

namespace detail {

inline Vector centroid_of(const std::vector<PhraseVector>& phrases, const std::vector<std::size_t>& idx) {
  Vector c(phrases.front().vector.size(), 0.0);
  for (auto i : idx)
    for (std::size_t d = 0; d < c.size(); ++d) c[d] += phrases[i].vector[d];
  for (double& x : c) x /= static_cast<double>(idx.size());
  return c;
}

}  // namespace detail

// Simplified committee clustering:
//   1. each phrase's neighbours are its top_k most cosine-similar phrases
//      among those at or above similarity_threshold;
//   2. the phrase plus its neighbours is a candidate committee, scored by
//      average pairwise similarity (1 for a singleton);
//   3. candidates of at least committee_min_size members are taken greedily
//      by score, rejecting any whose centroid is at or above the threshold
//      in similarity to an already accepted centroid;
//   4. every phrase joins the committee whose centroid it is most similar to.
// When no committee survives, every phrase becomes its own cluster.
// Output is ordered by size, largest first, then by first member.
inline std::vector<PhraseCluster> discover_event_clusters(const std::vector<PhraseVector>& phrases,
                                                          const ClusterParams& params) {
  if (phrases.size() < 2) throw Error("taxonomy", "clustering needs at least two phrases");
  const std::size_t dim = phrases.front().vector.size();
  for (const auto& p : phrases) {
    if (p.vector.size() != dim) throw Error("taxonomy", "phrase '" + p.phrase + "' has mismatched vector dimension");
    for (double x : p.vector)
      if (!std::isfinite(x)) throw Error("taxonomy", "phrase '" + p.phrase + "' has a non-finite vector entry");
  }

  const std::size_t n = phrases.size();
  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) sim[i][j] = sim[j][i] = cosine(phrases[i].vector, phrases[j].vector);

  struct Candidate {
    std::vector<std::size_t> members;
    double score;
    std::size_t seed;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && sim[i][j] >= params.similarity_threshold) others.push_back(j);
    std::stable_sort(others.begin(), others.end(), [&](auto a, auto b) { return sim[i][a] > sim[i][b]; });
    if (others.size() > params.top_k) others.resize(params.top_k);
    others.push_back(i);
    std::sort(others.begin(), others.end());
    if (others.size() < params.committee_min_size) continue;
    double score = 1.0;
    if (others.size() > 1) {
      double total = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < others.size(); ++a)
        for (std::size_t b = a + 1; b < others.size(); ++b, ++pairs) total += sim[others[a]][others[b]];
      score = total / static_cast<double>(pairs);
    }
    candidates.push_back({std::move(others), score, i});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.members.size() > b.members.size();
  });

  std::vector<Vector> committees;
  for (const auto& c : candidates) {
    auto centroid = detail::centroid_of(phrases, c.members);
    bool distinct = std::all_of(committees.begin(), committees.end(), [&](const Vector& acc) {
      return cosine(centroid, acc) < params.similarity_threshold;
    });
    if (distinct) committees.push_back(std::move(centroid));
  }

  std::vector<PhraseCluster> clusters;
  if (committees.empty()) {
    for (std::size_t i = 0; i < n; ++i) clusters.push_back({phrases[i].vector, {i}});
    return clusters;
  }
  clusters.resize(committees.size());
  for (std::size_t k = 0; k < committees.size(); ++k) clusters[k].centroid = committees[k];
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t best = 0;
    double best_sim = cosine(phrases[i].vector, committees[0]);
    for (std::size_t k = 1; k < committees.size(); ++k) {
      double s = cosine(phrases[i].vector, committees[k]);
      if (s > best_sim) {
        best_sim = s;
        best = k;
      }
    }
    clusters[best].members.push_back(i);
  }
  std::erase_if(clusters, [](const PhraseCluster& c) { return c.members.empty(); });
  std::stable_sort(clusters.begin(), clusters.end(), [](const PhraseCluster& a, const PhraseCluster& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return a.members.front() < b.members.front();
  });
  return clusters;
}

}  // namespace excavator
