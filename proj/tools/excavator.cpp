// excavator: corpus -> events/relations -> TCAG and timelines, plus the
// read-only JSON service over the resulting artifacts.

#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <httplib.h>

#include "excavator/pipeline.hpp"
#include "excavator/service.hpp"

using namespace excavator;

namespace {

YearMonth month_arg(const std::string& s, const char* flag) {
  auto m = YearMonth::parse(s);
  if (!m || s.size() != 7) throw Error("config", std::string(flag) + " must be YYYY-MM, got '" + s + "'");
  return *m;
}

std::pair<std::string, int> split_bind(const std::string& bind) {
  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw Error("config", "--bind must be host:port");
  int port = 0;
  auto tail = std::string_view(bind).substr(colon + 1);
  auto [p, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), port);
  if (ec != std::errc{} || p != tail.data() + tail.size() || port <= 0 || port > 65535)
    throw Error("config", "bad port in --bind '" + bind + "'");
  return {bind.substr(0, colon), port};
}

struct Args {
  PipelineConfig cfg;
  std::string from = "2020-01", to = "2020-05";
  std::string tagger = "lexicon";
  std::string artifacts = "out";
  std::string event;
  std::string geo;
  std::string month;
  std::string focus;
  std::size_t min_count = 1;
  std::size_t window = 3;
  bool strict_filter = false;
  bool strict_window = false;
  std::string bind = "127.0.0.1:8080";
};

void resolve_months(Args& a) {
  a.cfg.from = month_arg(a.from, "--from");
  a.cfg.to = month_arg(a.to, "--to");
  if (a.cfg.to < a.cfg.from) throw Error("config", "--from is after --to");
}

int run_ingest(Args& a) {
  resolve_months(a);
  RunStats stats;
  std::vector<Document> docs;
  for (const auto& path : a.cfg.inputs) {
    auto text = read_file(path, "corpus");
    std::istringstream in(text);
    auto r = detail::stage("corpus", [&] { return ingest_documents(in); });
    stats.skipped_lines += r.skipped;
    for (auto& d : r.documents) docs.push_back(std::move(d));
  }
  stats.corpus = monthly_article_counts(docs);
  stats.range = {a.cfg.from, a.cfg.to};
  std::size_t in_range = 0;
  for (const auto& d : docs) in_range += in_month_range(d, a.cfg.from, a.cfg.to);
  auto j = stats_to_json(stats);
  j.erase("mentions_per_type");
  j.erase("relations_per_type");
  j.erase("corpus_version");
  j["in_range"] = in_range;
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_extract(Args& a) {
  resolve_months(a);
  if (a.tagger == "perceptron")
    a.cfg.tagger = TaggerKind::perceptron;
  else if (a.tagger != "lexicon")
    throw Error("config", "--tagger must be lexicon or perceptron");
  auto out = run_pipeline(a.cfg);
  std::cout << summarize(out);
  return 0;
}

Snapshot load_snapshot(const Args& a) { return Snapshot::load(a.artifacts, a.cfg.taxonomy_path); }

QueryParams graph_params(const Args& a) {
  QueryParams q;
  if (!a.geo.empty()) q["geo"] = a.geo;
  if (!a.month.empty()) q["month"] = a.month;
  if (a.min_count != 1) q["min_count"] = std::to_string(a.min_count);
  if (a.strict_filter) q["strict"] = "true";
  if (!a.focus.empty()) q["focus"] = a.focus;
  return q;
}

int print_response(const Response& r) {
  if (r.status != 200) {
    std::cerr << r.body;
    return 1;
  }
  std::cout << r.body;
  return 0;
}

int run_graph(const Args& a) {
  auto snap = load_snapshot(a);
  return print_response(Service(snap).handle("/api/tcag", graph_params(a)));
}

int run_timeline(const Args& a) {
  auto snap = load_snapshot(a);
  QueryParams q{{"event", a.event}, {"from", a.from}, {"to", a.to}, {"window", std::to_string(a.window)}};
  if (!a.geo.empty()) q["geo"] = a.geo;
  if (a.strict_window) q["strict_window"] = "true";
  return print_response(Service(snap).handle("/api/timeline", q));
}

int run_serve(const Args& a) {
  auto [host, port] = split_bind(a.bind);
  auto snap = load_snapshot(a);
  Service svc(snap);
  httplib::Server server;
  std::cerr << "serving " << a.artifacts << " on http://" << host << ":" << port << "\n";
  serve(svc, host, port, server);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event and relation extraction over a document corpus"};
  app.require_subcommand(1);
  Args a;

  auto add_taxonomy = [&](CLI::App* c) {
    c->add_option("--taxonomy", a.cfg.taxonomy_path, "Event taxonomy file")->required();
  };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and print per-month article counts");
  ingest->add_option("--input", a.cfg.inputs, "Corpus JSONL file(s)")->required();
  ingest->add_option("--from", a.from, "First month (YYYY-MM)");
  ingest->add_option("--to", a.to, "Last month (YYYY-MM)");

  auto* extract = app.add_subcommand("extract", "Run the pipeline and write artifacts");
  extract->add_option("--input", a.cfg.inputs, "Corpus JSONL file(s)")->required();
  add_taxonomy(extract);
  extract->add_option("--lexicon", a.cfg.lexicon_path, "Trigger lexicon (phrase<TAB>Type)")->required();
  extract->add_option("--gazetteer", a.cfg.gazetteer_path, "Gazetteer (ID<TAB>alias)")->required();
  extract->add_option("--patterns", a.cfg.patterns_path, "Relation patterns")->required();
  extract->add_option("--out", a.cfg.out_dir, "Output directory")->required();
  extract->add_option("--from", a.from, "First month (YYYY-MM)");
  extract->add_option("--to", a.to, "Last month (YYYY-MM)");
  extract->add_option("--workers", a.cfg.workers, "Worker threads")->check(CLI::Range(1, 256));
  extract->add_option("--tagger", a.tagger, "Event tagger: lexicon or perceptron");
  extract->add_option("--event-train", a.cfg.event_training_path, "BIO training data for the perceptron tagger");
  extract->add_option("--argument-model", a.cfg.argument_model_path, "Argument tagger model (JSON)");
  extract->add_option("--argument-train", a.cfg.argument_training_path, "Argument training data (JSONL)");
  extract->add_option("--relation-model", a.cfg.relation_model_path, "Relation classifier (JSON)");
  extract->add_option("--relation-train", a.cfg.relation_training_path, "Relation training data (JSONL)");
  extract->add_option("--min-confidence", a.cfg.neural_min_confidence, "Neural relation threshold");
  extract->add_option("--generated-at", a.cfg.generated_at, "Timestamp stamped into tcag.json");

  auto* graph = app.add_subcommand("graph", "Print a (filtered) TCAG from artifacts");
  add_taxonomy(graph);
  graph->add_option("--out", a.artifacts, "Artifact directory");
  graph->add_option("--geo", a.geo, "Geo id filter");
  graph->add_option("--month", a.month, "Month filter (YYYY-MM)");
  graph->add_option("--min-count", a.min_count, "Minimum edge count");
  graph->add_option("--focus", a.focus, "Focused event type");
  graph->add_flag("--strict-filter", a.strict_filter, "Both endpoints must pass the filter");

  auto* timeline = app.add_subcommand("timeline", "Print a popularity series from artifacts");
  add_taxonomy(timeline);
  timeline->add_option("--out", a.artifacts, "Artifact directory");
  timeline->add_option("--event", a.event, "Event type")->required();
  timeline->add_option("--geo", a.geo, "Geo id");
  timeline->add_option("--from", a.from, "First month (YYYY-MM)");
  timeline->add_option("--to", a.to, "Last month (YYYY-MM)");
  timeline->add_option("--window", a.window, "Odd window in months");
  timeline->add_flag("--strict-window", a.strict_window, "Divide by the full window");

  auto* srv = app.add_subcommand("serve", "Serve the JSON API over artifacts");
  add_taxonomy(srv);
  srv->add_option("--out", a.artifacts, "Artifact directory");
  srv->add_option("--bind", a.bind, "host:port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) return run_ingest(a);
    if (*extract) return run_extract(a);
    if (*graph) return run_graph(a);
    if (*timeline) return run_timeline(a);
    if (*srv) return run_serve(a);
  } catch (const Error& e) {
    std::cerr << "excavator: stage " << e.stage() << " failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "excavator: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
