#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <tuple>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "excavator/common.hpp"
#include "excavator/corpus.hpp"
#include "excavator/event_extraction.hpp"
#include "excavator/vectors.hpp"

namespace excavator {

// ---------------------------------------------------------------------------
// Relation inventory

enum class RelationType { Causes, Mitigates, Before };

enum class RelationSubtype { Cause, Catalyst, Precondition, Mitigation, Preventative, BeforeAfter };

inline constexpr std::array<RelationSubtype, 6> kAllSubtypes = {
    RelationSubtype::Cause,      RelationSubtype::Catalyst,     RelationSubtype::Precondition,
    RelationSubtype::Mitigation, RelationSubtype::Preventative, RelationSubtype::BeforeAfter};

inline constexpr std::array<RelationType, 3> kAllRelationTypes = {RelationType::Causes, RelationType::Mitigates,
                                                                  RelationType::Before};

inline constexpr RelationType merge_subtype_to_type(RelationSubtype s) noexcept {
  switch (s) {
    case RelationSubtype::Cause:
    case RelationSubtype::Catalyst:
    case RelationSubtype::Precondition:
      return RelationType::Causes;
    case RelationSubtype::Mitigation:
    case RelationSubtype::Preventative:
      return RelationType::Mitigates;
    case RelationSubtype::BeforeAfter:
      return RelationType::Before;
  }
  return RelationType::Causes;
}

inline std::string_view to_string(RelationType t) {
  switch (t) {
    case RelationType::Causes: return "Causes";
    case RelationType::Mitigates: return "Mitigates";
    case RelationType::Before: return "Before";
  }
  return "";
}

inline std::string_view to_string(RelationSubtype s) {
  switch (s) {
    case RelationSubtype::Cause: return "Cause";
    case RelationSubtype::Catalyst: return "Catalyst";
    case RelationSubtype::Precondition: return "Precondition";
    case RelationSubtype::Mitigation: return "Mitigation";
    case RelationSubtype::Preventative: return "Preventative";
    case RelationSubtype::BeforeAfter: return "BeforeAfter";
  }
  return "";
}

inline std::optional<RelationSubtype> parse_relation_subtype(std::string_view s) {
  for (auto st : kAllSubtypes)
    if (to_string(st) == s) return st;
  if (s == "Before/after" || s == "Before/After") return RelationSubtype::BeforeAfter;
  return std::nullopt;
}

inline std::optional<RelationType> parse_relation_type(std::string_view s) {
  for (auto t : kAllRelationTypes)
    if (to_string(t) == s) return t;
  return std::nullopt;
}

enum class Provenance { pattern, neural };

inline std::string_view to_string(Provenance p) { return p == Provenance::pattern ? "pattern" : "neural"; }

struct RelationMention {
  std::string id;
  RelationType type = RelationType::Causes;
  RelationSubtype subtype = RelationSubtype::Cause;
  std::string left_event;  // X
  std::string right_event; // Y
  std::string left_type;
  std::string right_type;
  std::string doc_id;
  std::size_t sentence_index = 0;
  TokenSpan left_span;
  TokenSpan right_span;
  std::string evidence;  // sentence text
  CharSpan left_chars;   // relative to evidence
  CharSpan right_chars;
  std::optional<YearMonth> published_month;
  std::set<Provenance> provenance;
  double confidence = 0.0;
};

inline std::string relation_id(std::string_view left, RelationType t, std::string_view right) {
  return std::string(left) + "|" + std::string(to_string(t)) + "|" + std::string(right);
}

inline RelationMention make_relation(const Document& doc, const Sentence& sentence, const EventMention& left,
                                     const EventMention& right, RelationSubtype subtype, Provenance provenance,
                                     double confidence) {
  RelationMention r;
  r.subtype = subtype;
  r.type = merge_subtype_to_type(subtype);
  r.left_event = left.id;
  r.right_event = right.id;
  r.id = relation_id(left.id, r.type, right.id);
  r.left_type = left.event_type;
  r.right_type = right.event_type;
  r.doc_id = doc.id;
  r.sentence_index = sentence.index;
  r.left_span = left.trigger_span;
  r.right_span = right.trigger_span;
  r.evidence = sentence.text.empty() ? sentence.text_of({0, sentence.size()}) : sentence.text;
  if (!sentence.text.empty()) {
    r.left_chars = sentence.relative_chars(left.trigger_span);
    r.right_chars = sentence.relative_chars(right.trigger_span);
  }
  r.published_month = doc.published_month;
  r.provenance = {provenance};
  r.confidence = confidence;
  return r;
}

// ---------------------------------------------------------------------------
// Patterns
//
// One pattern per line:
//
//   lexical: X leads to Y => Cause
//   prop: cause[subject=X][object=Y] => Cause
//   lexical: X after Y => BeforeAfter reverse
//
// A lexical template starts with one slot and ends with the other; the
// words between them must equal the tokens between the two event mentions.
// A proposition names a predicate lemma (an optional "verb:" prefix is
// accepted) and one role constraint per slot. X is the relation's left
// argument unless the pattern ends with "reverse".

struct Pattern {
  enum class Kind { lexical, proposition };
  struct RoleConstraint {
    std::string role;
    char slot;  // 'X' or 'Y'
    auto operator<=>(const RoleConstraint&) const = default;
  };

  Kind kind = Kind::lexical;
  std::string source;
  // lexical
  std::vector<std::string> interior;  // lowercased literal tokens
  bool x_first = true;                // surface order of the slots
  // proposition
  std::string lemma;
  std::vector<RoleConstraint> constraints;

  RelationSubtype subtype = RelationSubtype::Cause;
  bool x_is_left = true;
};

inline Pattern compile_pattern(std::string_view source) {
  auto fail = [&](const std::string& why) -> Error {
    return Error("patterns", "cannot compile '" + std::string(source) + "': " + why);
  };
  auto text = trim(source);
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw fail("missing kind prefix");
  auto kind = trim(text.substr(0, colon));
  auto rest = text.substr(colon + 1);
  auto arrow = rest.rfind("=>");
  if (arrow == std::string_view::npos) throw fail("missing '=> Subtype'");
  auto body = trim(rest.substr(0, arrow));
  std::vector<std::string> tail;
  for (const auto& w : split(trim(rest.substr(arrow + 2)), ' '))
    if (!trim(w).empty()) tail.emplace_back(trim(w));
  if (tail.empty()) throw fail("missing subtype");
  if (tail.size() > 2 || (tail.size() == 2 && tail[1] != "reverse")) throw fail("unexpected text after subtype");
  auto subtype = parse_relation_subtype(tail[0]);
  if (!subtype) throw fail("unknown subtype '" + tail[0] + "'");

  Pattern p;
  p.source = std::string(text);
  p.subtype = *subtype;
  p.x_is_left = tail.size() == 1;

  if (kind == "lexical") {
    p.kind = Pattern::Kind::lexical;
    auto tokens = tokenize(body);
    std::size_t xs = 0, ys = 0;
    for (const auto& t : tokens) {
      xs += t.text == "X";
      ys += t.text == "Y";
    }
    if (xs != 1) throw fail(xs == 0 ? "no X slot" : "more than one X slot");
    if (ys != 1) throw fail(ys == 0 ? "no Y slot" : "more than one Y slot");
    const auto& first = tokens.front().text;
    const auto& last = tokens.back().text;
    if (!((first == "X" && last == "Y") || (first == "Y" && last == "X")))
      throw fail("slots must open and close the template");
    p.x_first = first == "X";
    for (std::size_t i = 1; i + 1 < tokens.size(); ++i) p.interior.push_back(tokens[i].lowercase);
    return p;
  }
  if (kind == "prop") {
    p.kind = Pattern::Kind::proposition;
    auto bracket = body.find('[');
    if (bracket == std::string_view::npos) throw fail("proposition needs role constraints");
    std::string lemma(trim(body.substr(0, bracket)));
    if (lemma.rfind("verb:", 0) == 0) lemma = lemma.substr(5);
    if (lemma.empty()) throw fail("missing predicate lemma");
    p.lemma = to_lower(lemma);
    auto rest_body = body.substr(bracket);
    std::size_t xs = 0, ys = 0;
    while (!rest_body.empty()) {
      rest_body = trim(rest_body);
      if (rest_body.empty()) break;
      if (rest_body.front() != '[') throw fail("expected '['");
      auto close = rest_body.find(']');
      if (close == std::string_view::npos) throw fail("unterminated '['");
      auto inner = rest_body.substr(1, close - 1);
      auto eq = inner.find('=');
      if (eq == std::string_view::npos) throw fail("constraint needs role=slot");
      std::string role(trim(inner.substr(0, eq)));
      std::string slot(trim(inner.substr(eq + 1)));
      if (slot != "X" && slot != "Y") throw fail("slot must be X or Y");
      if (role != "subject" && role != "object" && role.rfind("prep_", 0) != 0) throw fail("unknown role '" + role + "'");
      (slot == "X" ? xs : ys) += 1;
      p.constraints.push_back({role, slot[0]});
      rest_body = rest_body.substr(close + 1);
    }
    if (xs != 1) throw fail(xs == 0 ? "no X slot" : "more than one X slot");
    if (ys != 1) throw fail(ys == 0 ? "no Y slot" : "more than one Y slot");
    return p;
  }
  throw fail("unknown kind '" + std::string(kind) + "'");
}

inline std::vector<Pattern> parse_patterns(std::string_view text) {
  std::vector<Pattern> out;
  for (const auto& raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(compile_pattern(line));
  }
  return out;
}

inline std::vector<Pattern> load_patterns(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("patterns", "cannot open pattern file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_patterns(ss.str());
}

// ---------------------------------------------------------------------------
// Predicate-argument structure

struct Proposition {
  TokenSpan predicate;
  std::string lemma;
  std::string role;  // subject, object, prep_<word>
  TokenSpan argument;
  auto operator<=>(const Proposition&) const = default;
};

using PropositionGraph = std::vector<Proposition>;

namespace detail {

inline const std::vector<std::string>& predicate_lemmas() {
  static const std::vector<std::string> kLemmas = {
      "cause",     "lead",      "trigger",   "spark",    "prompt",   "fuel",      "drive",    "exacerbate",
      "worsen",    "increase",  "boost",     "raise",    "accelerate", "intensify", "aggravate", "create",
      "produce",   "generate",  "bring",     "result",   "force",    "push",      "reduce",   "decrease",
      "prevent",   "curb",      "slow",      "limit",    "mitigate", "stop",      "halt",     "block",
      "contain",   "ease",      "lower",     "cut",      "hinder",   "suppress",  "alleviate", "avert",
      "follow",    "precede",   "begin",     "start",    "end",      "affect",    "impact",   "threaten",
      "hit",       "spur",      "require",   "enable",   "allow",    "delay",     "restrict", "disrupt",
      "devastate", "kill",      "hurt",      "hamper",   "combat",   "fight",     "curtail",  "induce"};
  return kLemmas;
}

inline bool consonant(char c) { return c >= 'a' && c <= 'z' && std::string_view("aeiou").find(c) == std::string_view::npos; }

inline const std::map<std::string, std::string, std::less<>>& verb_forms() {
  static const auto kForms = [] {
    std::map<std::string, std::string, std::less<>> m;
    const std::set<std::string> really_doubles = {"stop", "spur", "hit", "cut", "begin"};
    for (const auto& l : predicate_lemmas()) {
      m[l] = l;
      const char last = l.back();
      const bool cy = l.size() > 1 && last == 'y' && consonant(l[l.size() - 2]);
      // third person
      if (last == 's' || last == 'x' || last == 'z' || l.ends_with("ch") || l.ends_with("sh"))
        m[l + "es"] = l;
      else if (cy)
        m[l.substr(0, l.size() - 1) + "ies"] = l;
      else
        m[l + "s"] = l;
      // past
      if (last == 'e')
        m[l + "d"] = l;
      else if (cy)
        m[l.substr(0, l.size() - 1) + "ied"] = l;
      else if (really_doubles.count(l))
        m[l + last + "ed"] = l;
      else
        m[l + "ed"] = l;
      // gerund
      if (last == 'e' && !l.ends_with("ee"))
        m[l.substr(0, l.size() - 1) + "ing"] = l;
      else if (really_doubles.count(l))
        m[l + last + "ing"] = l;
      else
        m[l + "ing"] = l;
    }
    for (auto [form, lemma] : std::initializer_list<std::pair<const char*, const char*>>{
             {"led", "lead"},       {"brought", "bring"}, {"drove", "drive"}, {"driven", "drive"},
             {"began", "begin"},    {"begun", "begin"},   {"fuelled", "fuel"}, {"fuelling", "fuel"},
             {"hit", "hit"}, {"cut", "cut"}, {"hurt", "hurt"}, {"fought", "fight"}})
      m[form] = lemma;
    return m;
  }();
  return kForms;
}

inline const std::set<std::string, std::less<>>& function_words() {
  static const std::set<std::string, std::less<>> kWords = {
      "a",     "an",    "the",     "this",   "that",   "these",   "those",  "its",    "their",   "his",
      "her",   "our",   "my",      "your",   "some",   "many",    "more",   "most",   "much",    "any",
      "all",   "each",  "every",   "also",   "not",    "no",      "further", "greatly", "significantly",
      "sharply", "likely", "has",  "have",   "had",    "will",    "would",  "could",  "can",     "may",
      "might", "must",  "should",  "is",     "are",    "was",     "were",   "be",     "been",    "being",
      "and",   "or",    "but",     "which",  "who",    "whom",    "whose",  "it",     "they",    "we",
      "he",    "she",   "there",   "then",   "than",   "as",      "so",     "such",   "other",   "both",
      "very",  "even",  "still",   "already", "often", "widely",  "quickly", "directly", "indirectly"};
  return kWords;
}

inline const std::set<std::string, std::less<>>& prepositions() {
  static const std::set<std::string, std::less<>> kPreps = {
      "to",    "of",     "in",    "on",      "at",      "by",    "for",  "with",  "from",    "into",
      "after", "before", "during", "over",   "under",   "through", "amid", "against", "about", "since",
      "until", "among",  "despite", "because", "due",   "across", "within", "without", "toward", "towards"};
  return kPreps;
}

inline bool is_punct(const Token& t) { return !t.text.empty() && !is_word_char(t.text.front()); }

inline bool is_content(const Token& t) {
  return !is_punct(t) && !function_words().count(t.lowercase) && !prepositions().count(t.lowercase) &&
         !verb_forms().count(t.lowercase);
}

// Head of the noun phrase starting at or after `i`: the last token of the
// first run of content tokens. Returns the index past the run as well.
inline std::optional<std::pair<std::size_t, std::size_t>> following_np_head(const Sentence& s, std::size_t i,
                                                                            bool stop_at_preposition) {
  const auto& tk = s.tokens;
  while (i < tk.size() && !is_content(tk[i])) {
    if (is_punct(tk[i])) return std::nullopt;
    if (stop_at_preposition && prepositions().count(tk[i].lowercase)) return std::nullopt;
    if (verb_forms().count(tk[i].lowercase)) return std::nullopt;
    ++i;
  }
  if (i >= tk.size()) return std::nullopt;
  std::size_t j = i;
  while (j + 1 < tk.size() && is_content(tk[j + 1])) ++j;
  return std::make_pair(j, j + 1);
}

}  // namespace detail

inline std::optional<std::string> predicate_lemma(std::string_view lowercase_token) {
  auto it = detail::verb_forms().find(lowercase_token);
  if (it == detail::verb_forms().end()) return std::nullopt;
  return it->second;
}

// Heuristic subject-verb-object triples. For every token that is a form of
// a known causal or temporal predicate: the nearest preceding content token
// is the subject; the head of the following noun phrase is the object; a
// preposition directly after the verb or after the object contributes a
// prep_<word> argument. Triples supplied with the document are returned
// as-is instead.
inline PropositionGraph extract_svo_propositions(const Sentence& sentence,
                                                 std::span<const PropositionTriple> precomputed = {}) {
  PropositionGraph graph;
  bool supplied = false;
  for (const auto& t : precomputed) {
    if (t.sentence != sentence.index) continue;
    supplied = true;
    std::string lemma;
    if (!t.predicate.empty() && t.predicate.end <= sentence.size()) {
      lemma = sentence.tokens[t.predicate.begin].lowercase;
      if (auto l = predicate_lemma(lemma)) lemma = *l;
    }
    graph.push_back({t.predicate, lemma, t.role, t.argument});
  }
  if (supplied) return graph;

  const auto& tk = sentence.tokens;
  for (std::size_t v = 0; v < tk.size(); ++v) {
    auto lemma = predicate_lemma(tk[v].lowercase);
    if (!lemma) continue;
    const TokenSpan pred{v, v + 1};
    for (std::size_t k = v; k-- > 0;) {
      if (detail::is_punct(tk[k]) && tk[k].text != "-") break;
      if (detail::is_content(tk[k])) {
        graph.push_back({pred, *lemma, "subject", {k, k + 1}});
        break;
      }
    }
    std::size_t cursor = v + 1;
    // skip auxiliary words and adverbs between the verb and what follows
    while (cursor < tk.size() && detail::function_words().count(tk[cursor].lowercase) &&
           !detail::prepositions().count(tk[cursor].lowercase))
      ++cursor;
    if (cursor < tk.size() && detail::prepositions().count(tk[cursor].lowercase)) {
      if (auto np = detail::following_np_head(sentence, cursor + 1, true))
        graph.push_back({pred, *lemma, "prep_" + tk[cursor].lowercase, {np->first, np->first + 1}});
      continue;
    }
    auto obj = detail::following_np_head(sentence, cursor, true);
    if (!obj) continue;
    graph.push_back({pred, *lemma, "object", {obj->first, obj->first + 1}});
    std::size_t after = obj->second;
    if (after < tk.size() && detail::prepositions().count(tk[after].lowercase))
      if (auto np = detail::following_np_head(sentence, after + 1, true))
        graph.push_back({pred, *lemma, "prep_" + tk[after].lowercase, {np->first, np->first + 1}});
  }
  return graph;
}

// ---------------------------------------------------------------------------
// Pattern matching

inline bool lexical_match(const Pattern& p, const Sentence& s, const EventMention& x, const EventMention& y) {
  const auto& first = p.x_first ? x : y;
  const auto& second = p.x_first ? y : x;
  if (first.trigger_span.end > second.trigger_span.begin) return false;
  const std::size_t gap = second.trigger_span.begin - first.trigger_span.end;
  if (gap != p.interior.size()) return false;
  for (std::size_t k = 0; k < gap; ++k)
    if (s.tokens[first.trigger_span.end + k].lowercase != p.interior[k]) return false;
  return true;
}

inline bool proposition_match(const Pattern& p, const PropositionGraph& props, const EventMention& x,
                              const EventMention& y) {
  std::set<TokenSpan> predicates;
  for (const auto& t : props)
    if (t.lemma == p.lemma) predicates.insert(t.predicate);
  for (const auto& pred : predicates) {
    bool all = true;
    for (const auto& c : p.constraints) {
      const auto& ev = c.slot == 'X' ? x : y;
      bool found = false;
      for (const auto& t : props)
        if (t.predicate == pred && t.role == c.role && t.argument.overlaps(ev.trigger_span)) {
          found = true;
          break;
        }
      if (!found) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

// Tries every ordered pair of distinct mentions in the sentence as (X, Y)
// against every pattern. One relation per (pair, pattern) hit; duplicates
// are merged later by union_and_dedup.
inline std::vector<RelationMention> match_patterns(const Document& doc, const Sentence& sentence,
                                                   std::span<const EventMention> events,
                                                   std::span<const Pattern> patterns, const PropositionGraph& props) {
  std::vector<RelationMention> out;
  for (const auto& x : events) {
    if (x.sentence_index != sentence.index) continue;
    for (const auto& y : events) {
      if (&x == &y || y.sentence_index != sentence.index || x.id == y.id) continue;
      for (const auto& p : patterns) {
        const bool hit = p.kind == Pattern::Kind::lexical ? lexical_match(p, sentence, x, y)
                                                          : proposition_match(p, props, x, y);
        if (!hit) continue;
        const auto& left = p.x_is_left ? x : y;
        const auto& right = p.x_is_left ? y : x;
        out.push_back(make_relation(doc, sentence, left, right, p.subtype, Provenance::pattern, 1.0));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mention-pooling classifier

inline Vector mention_pool(std::span<const Vector> token_vectors, TokenSpan span) {
  if (span.empty()) throw Error("relation_extraction", "cannot pool an empty span");
  if (span.end > token_vectors.size()) throw Error("relation_extraction", "span outside token vectors");
  const std::size_t dim = token_vectors[span.begin].size();
  Vector acc(dim, 0.0);
  for (std::size_t i = span.begin; i < span.end; ++i) {
    if (token_vectors[i].size() != dim) throw Error("relation_extraction", "token vectors differ in dimension");
    for (std::size_t d = 0; d < dim; ++d) acc[d] += token_vectors[i][d];
  }
  for (double& x : acc) x /= static_cast<double>(span.size());
  return acc;
}

struct PairRepresentation {
  Vector v1;
  Vector v2;
  Vector v;  // (v1, v2, |v1 - v2|)
};

inline PairRepresentation pair_representation(const Vector& v1, const Vector& v2) {
  if (v1.size() != v2.size()) throw Error("relation_extraction", "pair vectors differ in dimension");
  PairRepresentation rep{v1, v2, {}};
  rep.v.reserve(3 * v1.size());
  rep.v.insert(rep.v.end(), v1.begin(), v1.end());
  rep.v.insert(rep.v.end(), v2.begin(), v2.end());
  for (std::size_t d = 0; d < v1.size(); ++d) rep.v.push_back(std::abs(v1[d] - v2[d]));
  return rep;
}

// Output labels: index 0 is NoRelation, then the six subtypes in
// kAllSubtypes order. Argmax ties go to the lower index.
inline constexpr std::size_t kNumRelationLabels = 1 + kAllSubtypes.size();

inline std::string_view relation_label_name(std::size_t k) {
  return k == 0 ? std::string_view("NoRelation") : to_string(kAllSubtypes[k - 1]);
}

inline std::optional<std::size_t> parse_relation_label(std::string_view s) {
  if (s == "NoRelation") return 0;
  if (auto st = parse_relation_subtype(s)) return 1 + static_cast<std::size_t>(*st);
  return std::nullopt;
}

struct PairPrediction {
  std::optional<RelationSubtype> subtype;  // empty for NoRelation
  double probability = 0.0;
};

class RelationClassifier {
 public:
  RelationClassifier() = default;
  explicit RelationClassifier(std::size_t input_dim)
      : weights_(kNumRelationLabels, Vector(input_dim, 0.0)), bias_(kNumRelationLabels, 0.0) {}

  std::size_t input_dim() const noexcept { return weights_.empty() ? 0 : weights_.front().size(); }
  std::vector<Vector>& weights() noexcept { return weights_; }
  const std::vector<Vector>& weights() const noexcept { return weights_; }
  Vector& bias() noexcept { return bias_; }
  const Vector& bias() const noexcept { return bias_; }

  std::vector<double> probabilities(std::span<const double> v) const {
    if (v.size() != input_dim()) throw Error("relation_extraction", "representation does not match classifier");
    std::vector<double> z(kNumRelationLabels);
    for (std::size_t k = 0; k < kNumRelationLabels; ++k) z[k] = dot(weights_[k], v) + bias_[k];
    const double mx = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double& x : z) {
      x = std::exp(x - mx);
      total += x;
    }
    for (double& x : z) x /= total;
    return z;
  }

  friend bool operator==(const RelationClassifier&, const RelationClassifier&) = default;

  nlohmann::json to_json() const {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < kNumRelationLabels; ++k) labels.emplace_back(relation_label_name(k));
    return {{"labels", labels}, {"weights", weights_}, {"bias", bias_}};
  }

  static RelationClassifier from_json(const nlohmann::json& j) {
    RelationClassifier c;
    c.weights_ = j.at("weights").get<std::vector<Vector>>();
    c.bias_ = j.at("bias").get<Vector>();
    if (c.weights_.size() != kNumRelationLabels || c.bias_.size() != kNumRelationLabels)
      throw Error("model", "relation classifier must have one row per label");
    for (const auto& row : c.weights_)
      if (row.size() != c.weights_.front().size()) throw Error("model", "ragged relation classifier weights");
    return c;
  }

 private:
  std::vector<Vector> weights_;
  Vector bias_;
};

inline PairPrediction classify_pair(const RelationClassifier& classifier, const PairRepresentation& rep) {
  auto probs = classifier.probabilities(rep.v);
  std::size_t best = 0;
  for (std::size_t k = 1; k < probs.size(); ++k)
    if (probs[k] > probs[best]) best = k;
  PairPrediction p;
  p.probability = probs[best];
  if (best > 0) p.subtype = kAllSubtypes[best - 1];
  return p;
}

struct RelationExample {
  Vector representation;
  std::size_t label = 0;
};

struct ClassifierTrainOptions {
  std::size_t epochs = 50;
  double learning_rate = 0.5;
  std::uint64_t seed = 7;
};

// Plain SGD on softmax cross-entropy, one example at a time in a seeded order.
inline RelationClassifier train_relation_classifier(const std::vector<RelationExample>& data,
                                                    const ClassifierTrainOptions& opts = {}) {
  if (data.empty()) throw Error("training", "empty relation training set");
  const std::size_t dim = data.front().representation.size();
  for (const auto& ex : data) {
    if (ex.representation.size() != dim) throw Error("training", "relation examples differ in dimension");
    if (ex.label >= kNumRelationLabels) throw Error("training", "relation label out of range");
  }
  RelationClassifier c(dim);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opts.seed);
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    for (auto i : order) {
      const auto& ex = data[i];
      auto probs = c.probabilities(ex.representation);
      for (std::size_t k = 0; k < kNumRelationLabels; ++k) {
        const double g = probs[k] - (k == ex.label ? 1.0 : 0.0);
        if (g == 0.0) continue;
        auto& row = c.weights()[k];
        for (std::size_t d = 0; d < dim; ++d) row[d] -= opts.learning_rate * g * ex.representation[d];
        c.bias()[k] -= opts.learning_rate * g;
      }
    }
  }
  return c;
}

inline PairRepresentation represent_pair(std::span<const Vector> token_vectors, TokenSpan left, TokenSpan right) {
  return pair_representation(mention_pool(token_vectors, left), mention_pool(token_vectors, right));
}

// Fixture format, one JSON object per line:
//   {"tokens": [...], "left": [b, e], "right": [b, e], "label": "Cause"}
// label is a subtype name or "NoRelation".
template <TokenVectorProvider Provider>
std::vector<RelationExample> load_relation_examples(const std::string& path, const Provider& provider) {
  std::ifstream in(path);
  if (!in) throw Error("training", "cannot open relation training file " + path);
  std::vector<RelationExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      auto tokens = j.at("tokens").get<std::vector<std::string>>();
      TokenSpan left{j.at("left").at(0).get<std::size_t>(), j.at("left").at(1).get<std::size_t>()};
      TokenSpan right{j.at("right").at(0).get<std::size_t>(), j.at("right").at(1).get<std::size_t>()};
      auto label = parse_relation_label(j.at("label").get<std::string>());
      if (!label) throw Error("training", "unknown relation label");
      auto vectors = provider.embed(tokens);
      out.push_back({represent_pair(vectors, left, right).v, *label});
    } catch (const std::exception& e) {
      throw Error("training", path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// Classifies every ordered pair of distinct mentions in the sentence and keeps
// predictions other than NoRelation at or above min_confidence.
template <TokenVectorProvider Provider>
std::vector<RelationMention> neural_extract(const Document& doc, const Sentence& sentence,
                                            std::span<const EventMention> events,
                                            const RelationClassifier& classifier, const Provider& provider,
                                            double min_confidence = 0.5) {
  std::vector<RelationMention> out;
  std::vector<const EventMention*> here;
  for (const auto& e : events)
    if (e.sentence_index == sentence.index) here.push_back(&e);
  if (here.size() < 2) return out;
  const auto vectors = provider.embed(token_texts(sentence));
  for (const auto* x : here)
    for (const auto* y : here) {
      if (x == y || x->id == y->id) continue;
      auto pred = classify_pair(classifier, represent_pair(vectors, x->trigger_span, y->trigger_span));
      if (!pred.subtype || pred.probability < min_confidence) continue;
      out.push_back(make_relation(doc, sentence, *x, *y, *pred.subtype, Provenance::neural, pred.probability));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Union

inline bool relation_order(const RelationMention& a, const RelationMention& b) {
  return std::tie(a.doc_id, a.sentence_index, a.left_span, a.right_span, a.type) <
         std::tie(b.doc_id, b.sentence_index, b.left_span, b.right_span, b.type);
}

// Merges mentions sharing (left event, right event, type): provenance is
// the union, confidence the maximum, and the subtype comes from the most
// confident contributor (ties go to the subtype declared first,
// Cause..BeforeAfter), so the result does not depend on argument order.
inline std::vector<RelationMention> union_and_dedup(std::span<const RelationMention> pattern_out,
                                                    std::span<const RelationMention> neural_out) {
  std::map<std::tuple<std::string, std::string, RelationType>, RelationMention> merged;
  auto absorb = [&](const RelationMention& r) {
    auto key = std::make_tuple(r.left_event, r.right_event, r.type);
    auto [it, inserted] = merged.try_emplace(key, r);
    if (inserted) return;
    auto& m = it->second;
    m.provenance.insert(r.provenance.begin(), r.provenance.end());
    if (r.confidence > m.confidence || (r.confidence == m.confidence && r.subtype < m.subtype)) {
      m.subtype = r.subtype;
    }
    m.confidence = std::max(m.confidence, r.confidence);
  };
  for (const auto& r : pattern_out) absorb(r);
  for (const auto& r : neural_out) absorb(r);
  std::vector<RelationMention> out;
  out.reserve(merged.size());
  for (auto& [k, r] : merged) out.push_back(std::move(r));
  std::stable_sort(out.begin(), out.end(), relation_order);
  return out;
}

}  // namespace excavator
