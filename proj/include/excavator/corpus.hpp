#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "excavator/common.hpp"

namespace excavator {

enum class DocumentKind { news, scholarly };

inline std::string_view to_string(DocumentKind k) {
  return k == DocumentKind::news ? "news" : "scholarly";
}

inline std::optional<DocumentKind> parse_document_kind(std::string_view s) {
  if (s == "news") return DocumentKind::news;
  if (s == "scholarly") return DocumentKind::scholarly;
  return std::nullopt;
}

struct Token {
  std::string text;
  CharSpan char_span;
  std::string lowercase;
};

struct Sentence {
  std::size_t index = 0;
  std::vector<Token> tokens;
  CharSpan char_span;
  std::string text;  // body slice covered by char_span

  std::size_t size() const noexcept { return tokens.size(); }

  // Original text from the first to the last token of the span. Falls back
  // to space-joined tokens when the sentence carries no source text.
  std::string text_of(TokenSpan span) const {
    if (span.empty() || span.end > tokens.size()) return {};
    if (text.empty()) {
      std::vector<std::string> parts;
      for (std::size_t i = span.begin; i < span.end; ++i) parts.push_back(tokens[i].text);
      return join(parts, " ");
    }
    return text.substr(tokens[span.begin].char_span.begin - char_span.begin,
                       tokens[span.end - 1].char_span.end - tokens[span.begin].char_span.begin);
  }

  // Byte range of the span relative to `text`.
  CharSpan relative_chars(TokenSpan span) const {
    return {tokens[span.begin].char_span.begin - char_span.begin,
            tokens[span.end - 1].char_span.end - char_span.begin};
  }
};

// A predicate-argument triple supplied with the input document. Sentence and
// token indices refer to the built-in segmentation of the body.
struct PropositionTriple {
  std::size_t sentence = 0;
  TokenSpan predicate;
  std::string role;
  TokenSpan argument;

  auto operator<=>(const PropositionTriple&) const = default;
};

struct Document {
  std::string id;
  DocumentKind kind = DocumentKind::news;
  std::string source;
  std::string published_at;
  std::optional<YearMonth> published_month;  // absent when published_at is missing or unparseable
  std::string title;
  std::string body;
  std::vector<Sentence> sentences;
  std::vector<PropositionTriple> propositions;
};

inline bool in_month_range(const Document& d, YearMonth from, YearMonth to) {
  return d.published_month && *d.published_month >= from && *d.published_month <= to;
}

// ---------------------------------------------------------------------------
// Segmentation

namespace detail {

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

// Bytes >= 0x80 belong to UTF-8 sequences and are treated as word characters.
inline bool is_word_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') || u >= 0x80;
}

inline bool is_connector(char c) { return c == '-' || c == '\'' || c == '.' || c == '_'; }

inline const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "dr.",   "mr.",   "mrs.",  "ms.",   "prof.", "st.",   "sr.",   "jr.",   "gov.",  "sen.",
      "rep.",  "gen.",  "lt.",   "col.",  "sgt.",  "co.",   "corp.", "inc.",  "ltd.",  "no.",
      "vs.",   "etc.",  "e.g.",  "i.e.",  "al.",   "fig.",  "approx.", "u.s.", "u.k.", "u.n.",
      "jan.",  "feb.",  "mar.",  "apr.",  "jun.",  "jul.",  "aug.",  "sep.",  "sept.", "oct.",
      "nov.",  "dec.",  "mt.",   "ft."};
  return kAbbrev;
}

inline void push_token(std::vector<Token>& out, std::string_view body, std::size_t b, std::size_t e) {
  Token t;
  t.text = std::string(body.substr(b, e - b));
  t.char_span = {b, e};
  t.lowercase = to_lower(t.text);
  out.push_back(std::move(t));
}

}  // namespace detail

// Rule-based tokenizer. Whitespace separates chunks; a chunk that is a known
// abbreviation stays whole, otherwise it splits into word runs (alphanumerics
// joined by internal - ' . _) and single punctuation characters.
inline std::vector<Token> tokenize(std::string_view body, std::size_t offset = 0) {
  std::vector<Token> out;
  std::size_t i = 0;
  const std::size_t n = body.size();
  while (i < n) {
    if (detail::is_space(body[i])) {
      ++i;
      continue;
    }
    std::size_t chunk_end = i;
    while (chunk_end < n && !detail::is_space(body[chunk_end])) ++chunk_end;
    std::string lower = to_lower(body.substr(i, chunk_end - i));
    if (detail::abbreviations().count(lower)) {
      detail::push_token(out, body, i, chunk_end);
      i = chunk_end;
      continue;
    }
    while (i < chunk_end) {
      if (detail::is_word_char(body[i])) {
        std::size_t j = i + 1;
        while (j < chunk_end) {
          if (detail::is_word_char(body[j])) {
            ++j;
          } else if (detail::is_connector(body[j]) && j + 1 < chunk_end && detail::is_word_char(body[j + 1])) {
            j += 2;
          } else {
            break;
          }
        }
        detail::push_token(out, body, i, j);
        i = j;
      } else {
        detail::push_token(out, body, i, i + 1);
        ++i;
      }
    }
  }
  for (auto& t : out) {
    t.char_span.begin += offset;
    t.char_span.end += offset;
  }
  return out;
}

// Splits the body into sentences. A sentence ends at a "." "!" or "?" token
// that is followed by whitespace and then an uppercase ASCII letter, or at
// the end of the body. Abbreviations are single tokens and never end one.
inline Document segment_document(Document doc) {
  doc.sentences.clear();
  const std::string_view body = doc.body;
  auto tokens = tokenize(body);
  Sentence current;
  auto flush = [&] {
    if (current.tokens.empty()) return;
    current.index = doc.sentences.size();
    current.char_span = {current.tokens.front().char_span.begin, current.tokens.back().char_span.end};
    current.text = std::string(body.substr(current.char_span.begin, current.char_span.end - current.char_span.begin));
    doc.sentences.push_back(std::move(current));
    current = Sentence{};
  };
  for (auto& tok : tokens) {
    const bool terminal = tok.text == "." || tok.text == "!" || tok.text == "?";
    const std::size_t after = tok.char_span.end;
    current.tokens.push_back(std::move(tok));
    if (!terminal) continue;
    if (after >= body.size() || !detail::is_space(body[after])) continue;
    std::size_t k = after;
    while (k < body.size() && detail::is_space(body[k])) ++k;
    if (k < body.size() && body[k] >= 'A' && body[k] <= 'Z') flush();
  }
  flush();
  return doc;
}

// Treats the whole text as one sentence, without looking for breaks.
inline Sentence make_sentence(std::string_view text, std::size_t index = 0) {
  Sentence s;
  s.index = index;
  s.tokens = tokenize(text);
  if (!s.tokens.empty()) {
    s.char_span = {s.tokens.front().char_span.begin, s.tokens.back().char_span.end};
    s.text = std::string(text.substr(s.char_span.begin, s.char_span.end - s.char_span.begin));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Ingestion

struct IngestResult {
  std::vector<Document> documents;
  std::size_t skipped = 0;
  std::vector<std::size_t> skipped_lines;  // 1-based line numbers
};

namespace detail {

inline std::optional<Document> parse_document_line(const nlohmann::json& j) {
  if (!j.is_object()) return std::nullopt;
  auto str_field = [&](const char* key) -> const std::string* {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return nullptr;
    return &it->get_ref<const std::string&>();
  };
  const auto* id = str_field("id");
  const auto* kind = str_field("kind");
  const auto* body = str_field("body");
  if (!id || id->empty() || !kind || !body) return std::nullopt;
  auto k = parse_document_kind(*kind);
  if (!k) return std::nullopt;

  Document d;
  d.id = *id;
  d.kind = *k;
  if (const auto* s = str_field("source")) d.source = *s;
  if (const auto* s = str_field("title")) d.title = *s;
  d.body = *body;
  if (const auto* s = str_field("published_at")) {
    d.published_at = *s;
    d.published_month = YearMonth::parse(*s);
  }
  if (auto it = j.find("propositions"); it != j.end()) {
    if (!it->is_array()) return std::nullopt;
    for (const auto& p : *it) {
      try {
        PropositionTriple t;
        t.sentence = p.at("sentence").get<std::size_t>();
        t.predicate = {p.at("predicate").at(0).get<std::size_t>(), p.at("predicate").at(1).get<std::size_t>()};
        t.role = p.at("role").get<std::string>();
        t.argument = {p.at("argument").at(0).get<std::size_t>(), p.at("argument").at(1).get<std::size_t>()};
        d.propositions.push_back(std::move(t));
      } catch (const nlohmann::json::exception&) {
        return std::nullopt;
      }
    }
  }
  return d;
}

}  // namespace detail

// Reads one JSON document per line. Blank lines are ignored; lines that do
// not parse, lack a required field, or repeat an earlier id are skipped and
// counted. More than half the non-blank lines malformed is fatal.
inline IngestResult ingest_documents(std::istream& in) {
  if (!in) throw Error("corpus", "input stream is not readable");
  IngestResult result;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t lineno = 0;
  std::size_t nonblank = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++nonblank;
    std::optional<Document> doc;
    try {
      doc = detail::parse_document_line(nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception&) {
      doc.reset();
    }
    if (!doc || seen.count(doc->id)) {
      ++result.skipped;
      result.skipped_lines.push_back(lineno);
      continue;
    }
    seen.insert(doc->id);
    result.documents.push_back(std::move(*doc));
  }
  if (in.bad()) throw Error("corpus", "read error on input stream");
  if (nonblank > 0 && result.skipped * 2 > nonblank) {
    throw Error("corpus", std::to_string(result.skipped) + " of " + std::to_string(nonblank) +
                              " lines are malformed (first at line " + std::to_string(result.skipped_lines.front()) +
                              ")");
  }
  return result;
}

inline IngestResult ingest_documents_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("corpus", "cannot open input " + path);
  return ingest_documents(in);
}

// ---------------------------------------------------------------------------
// Volume statistics

struct CorpusStats {
  std::map<YearMonth, std::size_t> articles_per_month;
  std::size_t documents = 0;      // all ingested documents
  std::size_t missing_month = 0;  // excluded from articles_per_month

  std::size_t articles(YearMonth m) const {
    auto it = articles_per_month.find(m);
    return it == articles_per_month.end() ? 0 : it->second;
  }
};

inline CorpusStats monthly_article_counts(std::span<const Document> docs) {
  CorpusStats stats;
  stats.documents = docs.size();
  for (const auto& d : docs) {
    if (d.published_month)
      ++stats.articles_per_month[*d.published_month];
    else
      ++stats.missing_month;
  }
  return stats;
}

}  // namespace excavator
