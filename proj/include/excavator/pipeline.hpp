#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "excavator/artifacts.hpp"
#include "excavator/corpus.hpp"
#include "excavator/event_extraction.hpp"
#include "excavator/relation_extraction.hpp"
#include "excavator/taxonomy.hpp"
#include "excavator/tcag.hpp"
#include "excavator/timeline.hpp"
#include "excavator/vectors.hpp"

namespace excavator {

enum class TaggerKind { lexicon, perceptron };

struct PipelineConfig {
  std::vector<std::string> inputs;
  std::string taxonomy_path;
  std::string lexicon_path;
  std::string gazetteer_path;
  std::string patterns_path;
  // Event tagger: the lexicon, or a perceptron trained from event_training_path.
  TaggerKind tagger = TaggerKind::lexicon;
  std::string event_training_path;
  // Argument model: loaded from argument_model_path if set, else trained from
  // argument_training_path if set, else argument extraction is off.
  std::string argument_model_path;
  std::string argument_training_path;
  // Relation classifier, same precedence. Without one, only patterns run.
  std::string relation_model_path;
  std::string relation_training_path;
  std::string out_dir;
  YearMonth from{2020, 1};
  YearMonth to{2020, 5};
  std::size_t workers = 1;
  bool inherit_document_month = true;
  double neural_min_confidence = 0.9;
  std::size_t vector_dimension = 64;
  std::uint64_t seed = 17;
  // Stamped into tcag.json. Empty means kDefaultGeneratedAt, so reruns stay
  // byte-identical.
  std::string generated_at;
};

inline constexpr std::string_view kDefaultGeneratedAt = "1970-01-01T00:00:00Z";

// Resolved inputs shared by every document.
struct PipelineResources {
  Taxonomy taxonomy;
  TriggerLexicon lexicon;
  Gazetteer gazetteer;
  std::vector<Pattern> patterns;
  std::optional<LinearTaggerModel> event_model;
  std::optional<LinearTaggerModel> argument_model;
  std::optional<RelationClassifier> relation_model;
  HashedNgramProvider provider;
};

struct PipelineOutput {
  std::vector<Document> documents;
  std::vector<EventMention> mentions;
  std::vector<RelationMention> relations;
  RunStats stats;
  Tcag tcag;
};

namespace detail {

template <typename F>
auto stage(std::string_view name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(std::string(name), e.what());
  }
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results land in
// per-index slots so the merge order never depends on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::string corpus_version_of(const std::vector<std::string>& contents) {
  std::uint64_t h = 0;
  for (const auto& c : contents) h = fnv1a64(c, h);
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace detail

inline PipelineResources load_resources(const PipelineConfig& cfg) {
  PipelineResources r;
  r.provider = HashedNgramProvider(cfg.vector_dimension, cfg.seed);
  r.taxonomy = detail::stage("taxonomy", [&] { return load_taxonomy(cfg.taxonomy_path); });
  r.lexicon = detail::stage("lexicon", [&] {
    auto lex = TriggerLexicon::load(cfg.lexicon_path);
    lex.validate(r.taxonomy);
    return lex;
  });
  r.gazetteer = detail::stage("gazetteer", [&] { return Gazetteer::load(cfg.gazetteer_path); });
  r.patterns = detail::stage("patterns", [&] { return load_patterns(cfg.patterns_path); });
  detail::stage("models", [&] {
    if (cfg.tagger == TaggerKind::perceptron) {
      if (cfg.event_training_path.empty()) throw Error("models", "perceptron tagger needs event training data");
      r.event_model = train_sequence_tagger(load_annotated(cfg.event_training_path), {.epochs = 30, .seed = cfg.seed});
    }
    if (!cfg.argument_model_path.empty())
      r.argument_model = LinearTaggerModel::from_json(json::parse(read_file(cfg.argument_model_path, "models")));
    else if (!cfg.argument_training_path.empty())
      r.argument_model = train_sequence_tagger(load_annotated(cfg.argument_training_path), {.epochs = 30, .seed = cfg.seed});
    if (!cfg.relation_model_path.empty())
      r.relation_model = RelationClassifier::from_json(json::parse(read_file(cfg.relation_model_path, "models")));
    else if (!cfg.relation_training_path.empty())
      r.relation_model = train_relation_classifier(load_relation_examples(cfg.relation_training_path, r.provider),
                                                   {.epochs = 50, .learning_rate = 0.5, .seed = cfg.seed});
    if (r.relation_model && r.relation_model->input_dim() != 3 * r.provider.dimension())
      throw Error("models", "relation classifier dimension does not match the vector provider");
    return 0;
  });
  return r;
}

struct DocumentExtraction {
  std::vector<EventMention> mentions;
  std::vector<RelationMention> relations;
};

inline DocumentExtraction extract_document(const Document& doc, const PipelineResources& res,
                                           const PipelineConfig& cfg) {
  DocumentExtraction out;
  EventExtractionOptions eopts{.inherit_document_month = cfg.inherit_document_month};
  const LinearTaggerModel* args = res.argument_model ? &*res.argument_model : nullptr;
  if (res.event_model)
    out.mentions = extract_document_events(doc, *res.event_model, args, res.gazetteer, res.taxonomy, eopts);
  else
    out.mentions = extract_document_events(doc, LexiconTagger(res.lexicon), args, res.gazetteer, res.taxonomy, eopts);

  std::vector<RelationMention> from_patterns, from_neural;
  for (const auto& sentence : doc.sentences) {
    auto props = extract_svo_propositions(sentence, doc.propositions);
    auto p = match_patterns(doc, sentence, out.mentions, res.patterns, props);
    from_patterns.insert(from_patterns.end(), p.begin(), p.end());
    if (res.relation_model) {
      auto n = neural_extract(doc, sentence, out.mentions, *res.relation_model, res.provider, cfg.neural_min_confidence);
      from_neural.insert(from_neural.end(), n.begin(), n.end());
    }
  }
  out.relations = union_and_dedup(from_patterns, from_neural);
  return out;
}

inline bool mention_order(const EventMention& a, const EventMention& b) {
  return std::tie(a.doc_id, a.sentence_index, a.trigger_span) < std::tie(b.doc_id, b.sentence_index, b.trigger_span);
}

// Ingest, segment, extract, aggregate. Artifacts are written only when
// cfg.out_dir is set.
inline PipelineOutput run_pipeline(const PipelineConfig& cfg) {
  auto res = load_resources(cfg);
  PipelineOutput out;

  std::vector<std::string> contents;
  std::set<std::string> seen;
  detail::stage("corpus", [&] {
    for (const auto& path : cfg.inputs) {
      contents.push_back(read_file(path, "corpus"));
      std::istringstream in(contents.back());
      auto ingested = ingest_documents(in);
      out.stats.skipped_lines += ingested.skipped;
      for (auto& d : ingested.documents) {
        if (!seen.insert(d.id).second)
          throw Error("corpus", "document id '" + d.id + "' appears in more than one input");
        out.documents.push_back(std::move(d));
      }
    }
    return 0;
  });

  std::vector<DocumentExtraction> per_doc(out.documents.size());
  detail::stage("extract", [&] {
    detail::parallel_for(out.documents.size(), cfg.workers, [&](std::size_t i) {
      out.documents[i] = segment_document(std::move(out.documents[i]));
      per_doc[i] = extract_document(out.documents[i], res, cfg);
    });
    return 0;
  });
  for (auto& d : per_doc) {
    std::move(d.mentions.begin(), d.mentions.end(), std::back_inserter(out.mentions));
    std::move(d.relations.begin(), d.relations.end(), std::back_inserter(out.relations));
  }
  std::sort(out.mentions.begin(), out.mentions.end(), mention_order);
  std::sort(out.relations.begin(), out.relations.end(), relation_order);

  out.stats.corpus = monthly_article_counts(out.documents);
  out.stats.range = {cfg.from, cfg.to};
  out.stats.corpus_version = detail::corpus_version_of(contents);
  for (const auto& m : out.mentions) ++out.stats.mentions_per_type[m.event_type];
  for (const auto& r : out.relations) ++out.stats.relations_per_type[std::string(to_string(r.type))];

  out.tcag = build_tcag(out.mentions, out.relations, res.taxonomy, FilterSpec{});
  out.tcag.generated_at = cfg.generated_at.empty() ? std::string(kDefaultGeneratedAt) : cfg.generated_at;
  out.tcag.corpus_version = out.stats.corpus_version;

  if (!cfg.out_dir.empty()) {
    detail::stage("output", [&] {
      std::filesystem::create_directories(cfg.out_dir);
      const std::filesystem::path dir(cfg.out_dir);
      write_file((dir / "mentions.jsonl").string(), to_jsonl<EventMention>(out.mentions, mention_to_json));
      write_file((dir / "relations.jsonl").string(), to_jsonl<RelationMention>(out.relations, relation_to_json));
      write_file((dir / "stats.json").string(), stats_to_json(out.stats).dump(2) + "\n");
      write_file((dir / "tcag.json").string(), export_tcag_json(out.tcag));
      return 0;
    });
  }
  return out;
}

// Per-type summary in the layout of a counts table.
inline std::string summarize(const PipelineOutput& out) {
  std::ostringstream os;
  os << "documents: " << out.documents.size() << " (skipped lines: " << out.stats.skipped_lines << ")\n";
  std::vector<std::pair<std::string, std::size_t>> types(out.stats.mentions_per_type.begin(),
                                                         out.stats.mentions_per_type.end());
  std::stable_sort(types.begin(), types.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  os << "event mentions: " << out.mentions.size() << "\n";
  for (const auto& [t, n] : types) os << "  " << t << "\t" << n << "\n";
  os << "relations: " << out.relations.size() << "\n";
  for (const auto& [t, n] : out.stats.relations_per_type) os << "  " << t << "\t" << n << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Snapshot: immutable loaded artifacts behind the service.

class Snapshot {
 public:
  static Snapshot load(const std::string& artifact_dir, const std::string& taxonomy_path) {
    Snapshot s;
    const std::filesystem::path dir(artifact_dir);
    s.taxonomy_ = detail::stage("taxonomy", [&] { return load_taxonomy(taxonomy_path); });
    detail::stage("artifacts", [&] {
      s.mentions_ = read_jsonl((dir / "mentions.jsonl").string(), mention_from_json);
      s.relations_ = read_jsonl((dir / "relations.jsonl").string(), relation_from_json);
      s.stats_ = stats_from_json(json::parse(read_file((dir / "stats.json").string())));
      s.tcag_bytes_ = read_file((dir / "tcag.json").string());
      return 0;
    });
    auto stored = json::parse(s.tcag_bytes_);
    s.generated_at_ = stored.at("generated_at").get<std::string>();
    s.validate();
    s.tcag_ = s.build(FilterSpec{});
    if (export_tcag_json(s.tcag_) != s.tcag_bytes_)
      throw Error("artifacts", "tcag.json does not match the mentions and relations it was built from");
    return s;
  }

  static Snapshot from_output(const PipelineOutput& out, Taxonomy taxonomy) {
    Snapshot s;
    s.taxonomy_ = std::move(taxonomy);
    s.mentions_ = out.mentions;
    s.relations_ = out.relations;
    s.stats_ = out.stats;
    s.generated_at_ = out.tcag.generated_at;
    s.validate();
    s.tcag_ = s.build(FilterSpec{});
    s.tcag_bytes_ = export_tcag_json(s.tcag_);
    return s;
  }

  const Taxonomy& taxonomy() const noexcept { return taxonomy_; }
  const std::vector<EventMention>& mentions() const noexcept { return mentions_; }
  const std::vector<RelationMention>& relations() const noexcept { return relations_; }
  const RunStats& stats() const noexcept { return stats_; }
  const Tcag& tcag() const noexcept { return tcag_; }
  const std::string& tcag_bytes() const noexcept { return tcag_bytes_; }

  Tcag build(const FilterSpec& filter) const {
    auto g = build_tcag(mentions_, relations_, taxonomy_, filter);
    g.generated_at = generated_at_;
    g.corpus_version = stats_.corpus_version;
    return g;
  }

 private:
  void validate() const {
    std::set<std::string> ids;
    for (const auto& m : mentions_) {
      if (!taxonomy_.contains(m.event_type))
        throw Error("artifacts", "mention " + m.id + " has type '" + m.event_type + "' outside the taxonomy");
      ids.insert(m.id);
    }
    for (const auto& r : relations_)
      if (!ids.count(r.left_event) || !ids.count(r.right_event))
        throw Error("artifacts", "relation " + r.id + " references an unknown mention");
  }

  Taxonomy taxonomy_;
  std::vector<EventMention> mentions_;
  std::vector<RelationMention> relations_;
  RunStats stats_;
  std::string generated_at_;
  Tcag tcag_;
  std::string tcag_bytes_;
};

}  // namespace excavator
