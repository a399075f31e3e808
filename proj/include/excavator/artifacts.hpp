#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "excavator/common.hpp"
#include "excavator/corpus.hpp"
#include "excavator/event_extraction.hpp"
#include "excavator/relation_extraction.hpp"
#include "excavator/timeline.hpp"

namespace excavator {

using nlohmann::json;

namespace detail {

inline json span_json(TokenSpan s) { return json::array({s.begin, s.end}); }
inline json chars_json(CharSpan s) { return json::array({s.begin, s.end}); }
inline TokenSpan span_from(const json& j) { return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()}; }
inline CharSpan chars_from(const json& j) { return {j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()}; }

template <typename T, typename F>
json optional_json(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : json(nullptr);
}

inline std::optional<YearMonth> month_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto m = YearMonth::parse(j.get<std::string>());
  if (!m) throw Error("artifacts", "bad month '" + j.get<std::string>() + "'");
  return m;
}

inline json argument_json(const ArgumentMention& a) {
  return {{"role", to_string(a.role)}, {"span", span_json(a.span)}, {"text", a.text}};
}

inline ArgumentMention argument_from(const json& j) {
  auto role = parse_argument_role(j.at("role").get<std::string>());
  if (!role) throw Error("artifacts", "bad argument role");
  return {*role, span_from(j.at("span")), j.at("text").get<std::string>()};
}

}  // namespace detail

inline json mention_to_json(const EventMention& m) {
  using namespace detail;
  return {{"id", m.id},
          {"doc_id", m.doc_id},
          {"sentence_index", m.sentence_index},
          {"trigger", {{"span", span_json(m.trigger_span)}, {"text", m.trigger_text}}},
          {"event_type", m.event_type},
          {"location_arg", optional_json(m.location_arg, argument_json)},
          {"time_arg", optional_json(m.time_arg, argument_json)},
          {"geo", optional_json(m.geo, [](const std::string& g) { return json(g); })},
          {"month", optional_json(m.month, [](YearMonth ym) { return json(ym.str()); })},
          {"month_source", m.month ? json(m.month_inherited ? "document" : "argument") : json(nullptr)}};
}

inline EventMention mention_from_json(const json& j) {
  using namespace detail;
  EventMention m;
  m.id = j.at("id").get<std::string>();
  m.doc_id = j.at("doc_id").get<std::string>();
  m.sentence_index = j.at("sentence_index").get<std::size_t>();
  m.trigger_span = span_from(j.at("trigger").at("span"));
  m.trigger_text = j.at("trigger").at("text").get<std::string>();
  m.event_type = j.at("event_type").get<std::string>();
  if (!j.at("location_arg").is_null()) m.location_arg = argument_from(j.at("location_arg"));
  if (!j.at("time_arg").is_null()) m.time_arg = argument_from(j.at("time_arg"));
  if (!j.at("geo").is_null()) m.geo = j.at("geo").get<std::string>();
  m.month = month_from(j.at("month"));
  m.month_inherited = j.at("month_source") == "document";
  return m;
}

inline json relation_to_json(const RelationMention& r) {
  using namespace detail;
  json prov = json::array();
  for (auto p : r.provenance) prov.push_back(to_string(p));
  return {{"id", r.id},
          {"type", to_string(r.type)},
          {"subtype", to_string(r.subtype)},
          {"left_event", r.left_event},
          {"right_event", r.right_event},
          {"left_type", r.left_type},
          {"right_type", r.right_type},
          {"evidence",
           {{"doc_id", r.doc_id},
            {"sentence_index", r.sentence_index},
            {"text", r.evidence},
            {"left_span", span_json(r.left_span)},
            {"right_span", span_json(r.right_span)},
            {"left_chars", chars_json(r.left_chars)},
            {"right_chars", chars_json(r.right_chars)},
            {"published_month", optional_json(r.published_month, [](YearMonth ym) { return json(ym.str()); })}}},
          {"provenance", std::move(prov)},
          {"confidence", r.confidence}};
}

inline RelationMention relation_from_json(const json& j) {
  using namespace detail;
  RelationMention r;
  r.id = j.at("id").get<std::string>();
  auto type = parse_relation_type(j.at("type").get<std::string>());
  auto subtype = parse_relation_subtype(j.at("subtype").get<std::string>());
  if (!type || !subtype) throw Error("artifacts", "bad relation type or subtype in " + r.id);
  if (merge_subtype_to_type(*subtype) != *type) throw Error("artifacts", "subtype does not belong to type in " + r.id);
  r.type = *type;
  r.subtype = *subtype;
  r.left_event = j.at("left_event").get<std::string>();
  r.right_event = j.at("right_event").get<std::string>();
  r.left_type = j.at("left_type").get<std::string>();
  r.right_type = j.at("right_type").get<std::string>();
  const auto& ev = j.at("evidence");
  r.doc_id = ev.at("doc_id").get<std::string>();
  r.sentence_index = ev.at("sentence_index").get<std::size_t>();
  r.evidence = ev.at("text").get<std::string>();
  r.left_span = span_from(ev.at("left_span"));
  r.right_span = span_from(ev.at("right_span"));
  r.left_chars = chars_from(ev.at("left_chars"));
  r.right_chars = chars_from(ev.at("right_chars"));
  r.published_month = month_from(ev.at("published_month"));
  for (const auto& p : j.at("provenance")) r.provenance.insert(p == "pattern" ? Provenance::pattern : Provenance::neural);
  r.confidence = j.at("confidence").get<double>();
  return r;
}

template <typename T, typename F>
std::string to_jsonl(std::span<const T> items, F&& encode) {
  std::string out;
  for (const auto& it : items) {
    out += encode(it).dump();
    out += '\n';
  }
  return out;
}

template <typename F>
auto read_jsonl(const std::string& path, F&& decode) {
  std::ifstream in(path);
  if (!in) throw Error("artifacts", "cannot open " + path);
  std::vector<decltype(decode(json{}))> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(decode(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error("artifacts", path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// Corpus-level metadata written next to the extraction output.
struct RunStats {
  CorpusStats corpus;
  std::size_t skipped_lines = 0;
  MonthRange range;
  std::string corpus_version;
  std::map<std::string, std::size_t> mentions_per_type;
  std::map<std::string, std::size_t> relations_per_type;
};

inline json stats_to_json(const RunStats& s) {
  json months = json::object();
  for (const auto& [m, n] : s.corpus.articles_per_month) months[m.str()] = n;
  return {{"articles_per_month", std::move(months)},
          {"documents", s.corpus.documents},
          {"missing_month", s.corpus.missing_month},
          {"skipped_lines", s.skipped_lines},
          {"range", {{"from", s.range.from.str()}, {"to", s.range.to.str()}}},
          {"corpus_version", s.corpus_version},
          {"mentions_per_type", s.mentions_per_type},
          {"relations_per_type", s.relations_per_type}};
}

inline RunStats stats_from_json(const json& j) {
  RunStats s;
  for (const auto& [k, v] : j.at("articles_per_month").items()) {
    auto m = YearMonth::parse(k);
    if (!m) throw Error("artifacts", "bad month key '" + k + "' in stats");
    s.corpus.articles_per_month[*m] = v.get<std::size_t>();
  }
  s.corpus.documents = j.at("documents").get<std::size_t>();
  s.corpus.missing_month = j.at("missing_month").get<std::size_t>();
  s.skipped_lines = j.at("skipped_lines").get<std::size_t>();
  auto from = YearMonth::parse(j.at("range").at("from").get<std::string>());
  auto to = YearMonth::parse(j.at("range").at("to").get<std::string>());
  if (!from || !to) throw Error("artifacts", "bad range in stats");
  s.range = {*from, *to};
  s.corpus_version = j.at("corpus_version").get<std::string>();
  s.mentions_per_type = j.at("mentions_per_type").get<std::map<std::string, std::size_t>>();
  s.relations_per_type = j.at("relations_per_type").get<std::map<std::string, std::size_t>>();
  return s;
}

inline std::string read_file(const std::string& path, std::string_view stage = "artifacts") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string(stage), "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("output", "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("output", "write failed for " + path);
}

}  // namespace excavator
