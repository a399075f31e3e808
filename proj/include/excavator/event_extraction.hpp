#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "excavator/common.hpp"
#include "excavator/corpus.hpp"
#include "excavator/taxonomy.hpp"

namespace excavator {

// ---------------------------------------------------------------------------
// BIO tags

using TagSequence = std::vector<std::string>;

inline const std::string kOutside = "O";

struct LabeledSpan {
  TokenSpan span;
  std::string type;
  auto operator<=>(const LabeledSpan&) const = default;
};

// Contiguous B-x (I-x)* runs become spans. An I-x that does not continue a
// span of type x opens a new span, as if it were B-x. Tags that are neither
// O nor prefixed B-/I- are treated as O.
inline std::vector<LabeledSpan> decode_bio_spans(const TagSequence& tags) {
  std::vector<LabeledSpan> out;
  std::optional<LabeledSpan> open;
  auto close = [&] {
    if (open) out.push_back(*open);
    open.reset();
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& tag = tags[i];
    const bool begin = tag.size() > 2 && tag.compare(0, 2, "B-") == 0;
    const bool inside = tag.size() > 2 && tag.compare(0, 2, "I-") == 0;
    if (!begin && !inside) {
      close();
      continue;
    }
    std::string type = tag.substr(2);
    if (inside && open && open->type == type && open->span.end == i) {
      open->span.end = i + 1;
      continue;
    }
    close();
    open = LabeledSpan{{i, i + 1}, std::move(type)};
  }
  close();
  return out;
}

// Inverse of decode_bio_spans for non-overlapping spans.
inline TagSequence encode_bio_spans(const std::vector<LabeledSpan>& spans, std::size_t length) {
  TagSequence tags(length, kOutside);
  for (const auto& s : spans) {
    if (s.span.empty() || s.span.end > length) throw Error("event_extraction", "span outside sentence");
    for (std::size_t i = s.span.begin; i < s.span.end; ++i) {
      if (tags[i] != kOutside) throw Error("event_extraction", "overlapping spans cannot be BIO-encoded");
      tags[i] = (i == s.span.begin ? "B-" : "I-") + s.type;
    }
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Mentions

enum class ArgumentRole { Place, Time };

inline std::string_view to_string(ArgumentRole r) { return r == ArgumentRole::Place ? "Place" : "Time"; }

inline std::optional<ArgumentRole> parse_argument_role(std::string_view s) {
  if (s == "Place") return ArgumentRole::Place;
  if (s == "Time") return ArgumentRole::Time;
  return std::nullopt;
}

struct ArgumentMention {
  ArgumentRole role = ArgumentRole::Place;
  TokenSpan span;
  std::string text;
  auto operator<=>(const ArgumentMention&) const = default;
};

struct EventMention {
  std::string id;
  std::string doc_id;
  std::size_t sentence_index = 0;
  TokenSpan trigger_span;
  std::string trigger_text;
  std::string event_type;
  std::optional<ArgumentMention> location_arg;
  std::optional<ArgumentMention> time_arg;
  std::optional<std::string> geo;
  std::optional<YearMonth> month;
  bool month_inherited = false;  // month taken from the document date
};

inline std::string mention_id(std::string_view doc_id, std::size_t sentence, TokenSpan span) {
  return std::string(doc_id) + ":" + std::to_string(sentence) + ":" + std::to_string(span.begin) + "-" +
         std::to_string(span.end);
}

inline std::vector<std::string> token_texts(const Sentence& s) {
  std::vector<std::string> out;
  out.reserve(s.tokens.size());
  for (const auto& t : s.tokens) out.push_back(t.text);
  return out;
}

// ---------------------------------------------------------------------------
// Trigger lexicon

class TriggerLexicon {
 public:
  // `phrase` is tokenized with the corpus tokenizer and lowercased.
  void add(std::string_view phrase, std::string type) {
    std::vector<std::string> key;
    for (auto& t : tokenize(phrase)) key.push_back(t.lowercase);
    if (key.empty()) throw Error("event_extraction", "empty trigger phrase");
    max_len_ = std::max(max_len_, key.size());
    entries_[std::move(key)] = std::move(type);
  }

  const std::map<std::vector<std::string>, std::string>& entries() const noexcept { return entries_; }
  std::size_t max_length() const noexcept { return max_len_; }

  void validate(const Taxonomy& tax) const {
    for (const auto& [phrase, type] : entries_)
      if (!tax.contains(type))
        throw Error("lexicon", "trigger '" + join(phrase, " ") + "' maps to unknown type '" + type + "'");
  }

  // Lines are "phrase<TAB>Type"; '#' comments and blank lines are ignored.
  static TriggerLexicon parse(std::string_view text) {
    TriggerLexicon lex;
    std::size_t lineno = 0;
    for (const auto& raw : split(text, '\n')) {
      ++lineno;
      auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string_view::npos)
        throw Error("lexicon", "line " + std::to_string(lineno) + ": expected phrase<TAB>type");
      lex.add(trim(line.substr(0, tab)), std::string(trim(line.substr(tab + 1))));
    }
    return lex;
  }

  static TriggerLexicon load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("lexicon", "cannot open lexicon file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

 private:
  std::map<std::vector<std::string>, std::string> entries_;
  std::size_t max_len_ = 0;
};

// Longest match first, scanning left to right; matches never overlap.
inline std::vector<LabeledSpan> lexicon_match(const Sentence& sentence, const TriggerLexicon& lexicon) {
  std::vector<LabeledSpan> out;
  const std::size_t n = sentence.tokens.size();
  std::size_t i = 0;
  std::vector<std::string> key;
  while (i < n) {
    bool matched = false;
    for (std::size_t len = std::min(lexicon.max_length(), n - i); len >= 1; --len) {
      key.clear();
      for (std::size_t k = i; k < i + len; ++k) key.push_back(sentence.tokens[k].lowercase);
      auto it = lexicon.entries().find(key);
      if (it != lexicon.entries().end()) {
        out.push_back({{i, i + len}, it->second});
        i += len;
        matched = true;
        break;
      }
    }
    if (!matched) ++i;
  }
  return out;
}

inline EventMention make_mention(std::string_view doc_id, const Sentence& sentence, const LabeledSpan& s) {
  EventMention m;
  m.id = mention_id(doc_id, sentence.index, s.span);
  m.doc_id = std::string(doc_id);
  m.sentence_index = sentence.index;
  m.trigger_span = s.span;
  m.trigger_text = sentence.text_of(s.span);
  m.event_type = s.type;
  return m;
}

inline std::vector<EventMention> lexicon_tag_events(const Sentence& sentence, const TriggerLexicon& lexicon,
                                                    std::string_view doc_id = {}) {
  std::vector<EventMention> out;
  for (const auto& s : lexicon_match(sentence, lexicon)) out.push_back(make_mention(doc_id, sentence, s));
  return out;
}

// ---------------------------------------------------------------------------
// Linear-chain tagger

// Label order is fixed: "O" first, remaining labels in lexicographic order.
// Decoding ties resolve toward earlier labels in this order.
class LinearTaggerModel {
 public:
  LinearTaggerModel() : labels_{kOutside} { reset_transitions(); }

  explicit LinearTaggerModel(std::vector<std::string> labels) {
    std::erase(labels, kOutside);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    labels_.push_back(kOutside);
    labels_.insert(labels_.end(), labels.begin(), labels.end());
    reset_transitions();
  }

  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::size_t num_labels() const noexcept { return labels_.size(); }

  std::optional<std::size_t> label_index(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
  }

  // Row 0 is the start state; row p+1 is "previous label was p".
  double transition(std::size_t prev_row, std::size_t label) const { return transitions_[prev_row][label]; }
  double& transition(std::size_t prev_row, std::size_t label) { return transitions_[prev_row][label]; }

  const std::map<std::string, std::vector<double>>& emissions() const noexcept { return emissions_; }
  std::vector<double>& emission_row(const std::string& feature) {
    auto& row = emissions_[feature];
    if (row.empty()) row.assign(labels_.size(), 0.0);
    return row;
  }

  static std::vector<std::string> features(const std::vector<std::string>& tokens, std::size_t i) {
    auto at = [&](long k) -> std::string {
      if (k < 0) return "<s>";
      if (k >= static_cast<long>(tokens.size())) return "</s>";
      return to_lower(tokens[static_cast<std::size_t>(k)]);
    };
    const long p = static_cast<long>(i);
    return {"bias",
            "w=" + tokens[i],
            "lw=" + to_lower(tokens[i]),
            "w-1=" + at(p - 1),
            "w-2=" + at(p - 2),
            "w+1=" + at(p + 1),
            "w+2=" + at(p + 2)};
  }

  // emissions[i][y]: summed feature weights of token i under label y.
  std::vector<std::vector<double>> emission_scores(const std::vector<std::string>& tokens) const {
    std::vector<std::vector<double>> out(tokens.size(), std::vector<double>(labels_.size(), 0.0));
    for (std::size_t i = 0; i < tokens.size(); ++i)
      for (const auto& f : features(tokens, i)) {
        auto it = emissions_.find(f);
        if (it == emissions_.end()) continue;
        for (std::size_t y = 0; y < labels_.size(); ++y) out[i][y] += it->second[y];
      }
    return out;
  }

  // Exact best path. Scores accumulate left to right as
  // (prefix + transition) + emission. Among equal-scoring paths the one
  // with the earliest label at the last position wins, then at the
  // position before it, and so on.
  std::vector<std::size_t> viterbi(const std::vector<std::vector<double>>& emit) const {
    const std::size_t n = emit.size();
    const std::size_t L = labels_.size();
    if (n == 0) return {};
    std::vector<std::vector<double>> delta(n, std::vector<double>(L));
    std::vector<std::vector<std::size_t>> back(n, std::vector<std::size_t>(L, 0));
    for (std::size_t y = 0; y < L; ++y) delta[0][y] = (0.0 + transitions_[0][y]) + emit[0][y];
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t y = 0; y < L; ++y) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t p = 0; p < L; ++p) {
          double s = delta[i - 1][p] + transitions_[p + 1][y];
          if (s > best) {
            best = s;
            arg = p;
          }
        }
        delta[i][y] = best + emit[i][y];
        back[i][y] = arg;
      }
    }
    std::vector<std::size_t> path(n);
    std::size_t last = 0;
    for (std::size_t y = 1; y < L; ++y)
      if (delta[n - 1][y] > delta[n - 1][last]) last = y;
    path[n - 1] = last;
    for (std::size_t i = n - 1; i > 0; --i) path[i - 1] = back[i][path[i]];
    return path;
  }

  TagSequence tag_tokens(const std::vector<std::string>& tokens) const {
    TagSequence out;
    for (auto y : viterbi(emission_scores(tokens))) out.push_back(labels_[y]);
    return out;
  }

  TagSequence tag(const Sentence& sentence) const { return tag_tokens(token_texts(sentence)); }

  friend bool operator==(const LinearTaggerModel&, const LinearTaggerModel&) = default;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["labels"] = labels_;
    j["transitions"] = transitions_;
    nlohmann::json em = nlohmann::json::object();
    for (const auto& [f, row] : emissions_) em[f] = row;
    j["emissions"] = std::move(em);
    return j;
  }

  static LinearTaggerModel from_json(const nlohmann::json& j) {
    LinearTaggerModel m;
    m.labels_ = j.at("labels").get<std::vector<std::string>>();
    if (m.labels_.empty() || m.labels_.front() != kOutside)
      throw Error("model", "tagger labels must start with O");
    m.transitions_ = j.at("transitions").get<std::vector<std::vector<double>>>();
    if (m.transitions_.size() != m.labels_.size() + 1)
      throw Error("model", "transition table does not match label count");
    for (const auto& row : m.transitions_)
      if (row.size() != m.labels_.size()) throw Error("model", "transition row does not match label count");
    for (const auto& [f, row] : j.at("emissions").items()) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != m.labels_.size()) throw Error("model", "emission row for '" + f + "' has wrong width");
      m.emissions_[f] = std::move(r);
    }
    return m;
  }

 private:
  void reset_transitions() {
    transitions_.assign(labels_.size() + 1, std::vector<double>(labels_.size(), 0.0));
  }

  std::vector<std::string> labels_;
  std::vector<std::vector<double>> transitions_;
  std::map<std::string, std::vector<double>> emissions_;
};

struct AnnotatedSentence {
  std::vector<std::string> tokens;
  TagSequence tags;
};

struct TaggerTrainOptions {
  std::size_t epochs = 30;
  std::uint64_t seed = 1;
};

// Fisher-Yates with a fixed engine so the order is identical across
// standard library implementations.
inline void deterministic_shuffle(std::vector<std::size_t>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

// Averaged structured perceptron. Training stops early after the first epoch
// without mistakes; the returned model carries the averaged weights.
inline LinearTaggerModel train_sequence_tagger(const std::vector<AnnotatedSentence>& data,
                                               const TaggerTrainOptions& opts = {}) {
  if (data.empty()) throw Error("training", "empty training set");
  std::vector<std::string> labels;
  for (const auto& s : data) {
    if (s.tokens.size() != s.tags.size())
      throw Error("training", "tokens and tags differ in length (" + std::to_string(s.tokens.size()) + " vs " +
                                  std::to_string(s.tags.size()) + ")");
    labels.insert(labels.end(), s.tags.begin(), s.tags.end());
  }
  LinearTaggerModel model(labels);
  LinearTaggerModel sums(model.labels());  // sum of counter-weighted updates
  const std::size_t L = model.num_labels();

  std::vector<std::vector<std::size_t>> gold(data.size());
  for (std::size_t k = 0; k < data.size(); ++k)
    for (const auto& t : data[k].tags) gold[k].push_back(*model.label_index(t));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(opts.seed);
  double counter = 1.0;

  auto update = [&](const std::vector<std::string>& tokens, const std::vector<std::size_t>& path, double sign) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::size_t prev_row = i == 0 ? 0 : path[i - 1] + 1;
      model.transition(prev_row, path[i]) += sign;
      sums.transition(prev_row, path[i]) += sign * counter;
      for (const auto& f : LinearTaggerModel::features(tokens, i)) {
        model.emission_row(f)[path[i]] += sign;
        sums.emission_row(f)[path[i]] += sign * counter;
      }
    }
  };

  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    std::size_t mistakes = 0;
    for (auto k : order) {
      const auto& tokens = data[k].tokens;
      // Hamming-loss augmented decode: a gold path that only wins on a tie
      // still counts as a mistake, so the learned weights keep a margin.
      auto emit = model.emission_scores(tokens);
      for (std::size_t i = 0; i < tokens.size(); ++i)
        for (std::size_t y = 0; y < L; ++y)
          if (y != gold[k][i]) emit[i][y] += 1.0;
      auto predicted = model.viterbi(emit);
      if (predicted != gold[k]) {
        ++mistakes;
        update(tokens, gold[k], +1.0);
        update(tokens, predicted, -1.0);
      }
      counter += 1.0;
    }
    if (mistakes == 0) {
      // Later epochs would change nothing but the counter.
      counter += static_cast<double>((opts.epochs - epoch - 1) * data.size());
      break;
    }
  }

  // averaged = w - sums / counter
  LinearTaggerModel averaged(model.labels());
  for (std::size_t r = 0; r <= L; ++r)
    for (std::size_t y = 0; y < L; ++y)
      averaged.transition(r, y) = model.transition(r, y) - sums.transition(r, y) / counter;
  for (const auto& [f, row] : model.emissions()) {
    const auto& srow = sums.emissions().at(f);
    auto& out = averaged.emission_row(f);
    for (std::size_t y = 0; y < L; ++y) out[y] = row[y] - srow[y] / counter;
  }
  return averaged;
}

// One JSON object per line: {"tokens": [...], "tags": [...]}.
inline std::vector<AnnotatedSentence> load_annotated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("training", "cannot open training file " + path);
  std::vector<AnnotatedSentence> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      AnnotatedSentence s{j.at("tokens").get<std::vector<std::string>>(), j.at("tags").get<TagSequence>()};
      if (s.tokens.size() != s.tags.size()) throw Error("training", "length mismatch");
      out.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw Error("training", path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// Anything that produces one BIO tag per token of a sentence.
template <typename T>
concept SentenceTagger = requires(const T& t, const Sentence& s) {
  { t.tag(s) } -> std::same_as<TagSequence>;
};

class LexiconTagger {
 public:
  explicit LexiconTagger(const TriggerLexicon& lexicon) : lexicon_(&lexicon) {}
  TagSequence tag(const Sentence& s) const { return encode_bio_spans(lexicon_match(s, *lexicon_), s.size()); }

 private:
  const TriggerLexicon* lexicon_;
};

static_assert(SentenceTagger<LexiconTagger>);
static_assert(SentenceTagger<LinearTaggerModel>);

// ---------------------------------------------------------------------------
// Argument extraction

inline const std::string kTriggerOpen = "<t>";
inline const std::string kTriggerClose = "</t>";

inline std::vector<std::string> mark_trigger(const std::vector<std::string>& tokens, TokenSpan trigger) {
  std::vector<std::string> out;
  out.reserve(tokens.size() + 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == trigger.begin) out.push_back(kTriggerOpen);
    out.push_back(tokens[i]);
    if (i + 1 == trigger.end) out.push_back(kTriggerClose);
  }
  return out;
}

// Tags the trigger-marked sentence with the argument-role model and maps the
// Place/Time spans back to unmarked token indices. Marker tokens never end
// up inside a returned span.
inline std::vector<ArgumentMention> extract_arguments(const LinearTaggerModel& model, const Sentence& sentence,
                                                      TokenSpan trigger) {
  if (trigger.empty() || trigger.end > sentence.size())
    throw Error("event_extraction", "trigger span outside sentence");
  const auto marked = mark_trigger(token_texts(sentence), trigger);
  auto to_original = [&](std::size_t m) -> std::optional<std::size_t> {
    if (m < trigger.begin) return m;
    if (m == trigger.begin || m == trigger.end + 1) return std::nullopt;
    if (m <= trigger.end) return m - 1;
    return m - 2;
  };
  std::vector<ArgumentMention> out;
  for (const auto& s : decode_bio_spans(model.tag_tokens(marked))) {
    auto role = parse_argument_role(s.type);
    if (!role) continue;
    std::optional<std::size_t> first, last;
    for (std::size_t m = s.span.begin; m < s.span.end; ++m) {
      if (auto o = to_original(m)) {
        if (!first) first = o;
        last = o;
      }
    }
    if (!first) continue;
    TokenSpan span{*first, *last + 1};
    out.push_back({*role, span, sentence.text_of(span)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Time resolution

namespace detail {

inline std::vector<std::string> normalized_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (is_word_char(c)) {
      cur += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::optional<int> month_from_word(std::string_view w) {
  static const std::array<std::pair<const char*, int>, 24> kMonths{{
      {"january", 1}, {"jan", 1},  {"february", 2}, {"feb", 2},   {"march", 3},    {"mar", 3},
      {"april", 4},   {"apr", 4},  {"may", 5},      {"june", 6},  {"jun", 6},      {"july", 7},
      {"jul", 7},     {"august", 8}, {"aug", 8},    {"september", 9}, {"sept", 9}, {"sep", 9},
      {"october", 10}, {"oct", 10}, {"november", 11}, {"nov", 11}, {"december", 12}, {"dec", 12},
  }};
  for (const auto& [name, m] : kMonths)
    if (w == name) return m;
  return std::nullopt;
}

inline bool contains_phrase(const std::vector<std::string>& words, std::initializer_list<std::string_view> phrase) {
  const std::size_t k = phrase.size();
  if (k == 0 || words.size() < k) return false;
  for (std::size_t i = 0; i + k <= words.size(); ++i) {
    std::size_t j = 0;
    for (auto p : phrase) {
      if (words[i + j] != p) break;
      ++j;
    }
    if (j == k) return true;
  }
  return false;
}

}  // namespace detail

// Rule-based month resolution relative to the document month:
//   "YYYY-MM[-DD]"                    -> that month
//   month name with a year            -> that month
//   month name alone                  -> that month in the document year if
//                                        not after the document month, else
//                                        in the previous year
//   "last/previous month"             -> document month - 1
//   "next month"                      -> document month + 1
//   "today", "now", "this week/month",
//   "yesterday", "tonight"            -> document month
// Anything else resolves to nothing.
inline std::optional<YearMonth> resolve_time_to_month(std::string_view arg_text, YearMonth doc_month) {
  static const std::regex kIso(R"((\d{4})-(\d{2}))");
  std::string text(arg_text);
  std::smatch m;
  if (std::regex_search(text, m, kIso)) {
    if (auto ym = YearMonth::parse(m.str(0))) return ym;
  }
  const auto words = detail::normalized_words(arg_text);
  std::optional<int> month, year;
  for (const auto& w : words) {
    if (!month)
      if (auto mo = detail::month_from_word(w)) month = mo;
    if (!year && w.size() == 4 && std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      int y = std::stoi(w);
      if (y >= 1900 && y <= 2099) year = y;
    }
  }
  if (month && year) return YearMonth{*year, *month};
  if (month) {
    YearMonth candidate{doc_month.year, *month};
    if (candidate > doc_month) candidate.year -= 1;
    return candidate;
  }
  if (detail::contains_phrase(words, {"last", "month"}) || detail::contains_phrase(words, {"previous", "month"}))
    return doc_month.plus(-1);
  if (detail::contains_phrase(words, {"next", "month"})) return doc_month.plus(1);
  for (auto w : {"today", "now", "yesterday", "tonight", "currently"})
    if (detail::contains_phrase(words, {w})) return doc_month;
  if (detail::contains_phrase(words, {"this", "week"}) || detail::contains_phrase(words, {"this", "month"}))
    return doc_month;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Location resolution

class Gazetteer {
 public:
  void add(std::string id, std::string_view alias) {
    auto key = normalize(alias);
    if (key.empty()) throw Error("gazetteer", "empty alias for " + id);
    aliases_[key] = std::move(id);
  }

  const std::map<std::string, std::string>& aliases() const noexcept { return aliases_; }

  // Case-insensitive; the longest alias occurring on word boundaries wins.
  std::optional<std::string> resolve(std::string_view text) const {
    const std::string hay = " " + normalize(text) + " ";
    const std::string* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [alias, id] : aliases_) {
      if (alias.size() <= best_len) continue;
      if (hay.find(" " + alias + " ") != std::string::npos) {
        best = &id;
        best_len = alias.size();
      }
    }
    if (!best) return std::nullopt;
    return *best;
  }

  // Lines are "ID<TAB>alias".
  static Gazetteer parse(std::string_view text) {
    Gazetteer g;
    std::size_t lineno = 0;
    for (const auto& raw : split(text, '\n')) {
      ++lineno;
      auto line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto tab = line.find('\t');
      if (tab == std::string_view::npos)
        throw Error("gazetteer", "line " + std::to_string(lineno) + ": expected id<TAB>alias");
      g.add(std::string(trim(line.substr(0, tab))), trim(line.substr(tab + 1)));
    }
    return g;
  }

  static Gazetteer load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("gazetteer", "cannot open gazetteer file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

 private:
  static std::string normalize(std::string_view s) { return join(detail::normalized_words(s), " "); }

  std::map<std::string, std::string> aliases_;
};

inline std::optional<std::string> resolve_location(std::string_view arg_text, const Gazetteer& gazetteer) {
  return gazetteer.resolve(arg_text);
}

// ---------------------------------------------------------------------------
// Two-stage extraction over one document

struct EventExtractionOptions {
  bool inherit_document_month = true;
};

// Stage one tags triggers; stage two runs the argument model once per
// trigger. Mentions whose type is not in the taxonomy are dropped.
template <SentenceTagger Tagger>
std::vector<EventMention> extract_document_events(const Document& doc, const Tagger& tagger,
                                                  const LinearTaggerModel* argument_model,
                                                  const Gazetteer& gazetteer, const Taxonomy& taxonomy,
                                                  const EventExtractionOptions& opts = {}) {
  std::vector<EventMention> out;
  for (const auto& sentence : doc.sentences) {
    for (const auto& s : decode_bio_spans(tagger.tag(sentence))) {
      if (!taxonomy.contains(s.type)) continue;
      auto m = make_mention(doc.id, sentence, s);
      if (argument_model) {
        for (auto& arg : extract_arguments(*argument_model, sentence, s.span)) {
          if (arg.role == ArgumentRole::Place && !m.location_arg) m.location_arg = std::move(arg);
          else if (arg.role == ArgumentRole::Time && !m.time_arg) m.time_arg = std::move(arg);
        }
      }
      if (m.location_arg) m.geo = resolve_location(m.location_arg->text, gazetteer);
      if (m.time_arg && doc.published_month) m.month = resolve_time_to_month(m.time_arg->text, *doc.published_month);
      if (!m.month && opts.inherit_document_month && doc.published_month) {
        m.month = doc.published_month;
        m.month_inherited = true;
      }
      out.push_back(std::move(m));
    }
  }
  return out;
}

}  // namespace excavator
