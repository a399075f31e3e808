#include <random>

#include <gtest/gtest.h>

#include "excavator/relation_extraction.hpp"
#include "support.hpp"

using namespace excavator;
using testing_support::source_path;
namespace oracle = testing_support::oracle;

namespace {

const TriggerLexicon& lexicon() {
  static const TriggerLexicon l = TriggerLexicon::load(source_path("data/lexicon.tsv"));
  return l;
}

Document one_sentence_doc(std::string body) {
  Document d;
  d.id = "d";
  d.published_month = YearMonth{2020, 3};
  d.body = std::move(body);
  return segment_document(std::move(d));
}

std::vector<oracle::RelationKey> keys(const std::vector<RelationMention>& rs) {
  std::vector<oracle::RelationKey> out;
  for (const auto& r : rs) out.emplace_back(r.left_event, r.right_event, std::string(to_string(r.subtype)));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Types

TEST(Subtypes, MergeToTypes) {
  const std::map<std::string, std::string> expected = {{"Cause", "Causes"},           {"Catalyst", "Causes"},
                                                       {"Precondition", "Causes"},    {"Mitigation", "Mitigates"},
                                                       {"Preventative", "Mitigates"}, {"BeforeAfter", "Before"}};
  ASSERT_EQ(kAllSubtypes.size(), expected.size());
  for (auto st : kAllSubtypes) {
    auto name = std::string(to_string(st));
    EXPECT_EQ(to_string(merge_subtype_to_type(st)), expected.at(name)) << name;
    EXPECT_EQ(parse_relation_subtype(name), st);
  }
}

TEST(Subtypes, RelationsCarryMergedType) {
  // one hand-written lexical pattern per subtype, all fired on the same pair
  auto d = one_sentence_doc("Lockdown zz unemployment.");
  auto events = lexicon_tag_events(d.sentences[0], lexicon(), d.id);
  ASSERT_EQ(events.size(), 2u);
  for (auto st : kAllSubtypes) {
    auto p = compile_pattern("lexical: X zz Y => " + std::string(to_string(st)));
    std::vector<Pattern> ps = {p};
    auto rs = match_patterns(d, d.sentences[0], events, ps, {});
    ASSERT_EQ(rs.size(), 1u);
    EXPECT_EQ(rs[0].subtype, st);
    EXPECT_EQ(rs[0].type, merge_subtype_to_type(st));
    EXPECT_EQ(rs[0].left_type, "Lockdown");
    EXPECT_EQ(rs[0].right_type, "Unemployment");
    EXPECT_EQ(rs[0].id, rs[0].left_event + "|" + std::string(to_string(rs[0].type)) + "|" + rs[0].right_event);
  }
}

// ---------------------------------------------------------------------------
// Pattern grammar

TEST(Patterns, CompileErrors) {
  for (const char* bad : {"lexical: X leads to => Cause", "lexical: X leads Y to X => Cause", "bogus: X to Y => Cause",
                          "lexical: X to Y => Nope", "lexical: X to Y", "lexical: to X Y => Cause",
                          "prop: cause[agent=X][object=Y] => Cause", "prop: cause => Cause",
                          "prop: cause[subject=X][object=Z] => Cause", "lexical: X to Y => Cause backwards"}) {
    try {
      compile_pattern(bad);
      ADD_FAILURE() << "compiled: " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.stage(), "patterns") << bad;
    }
  }
}

TEST(Patterns, ShippedInventoryCompiles) {
  auto ps = load_patterns(source_path("data/patterns.txt"));
  EXPECT_GE(ps.size(), 12u);
  std::set<RelationSubtype> covered;
  for (const auto& p : ps) covered.insert(p.subtype);
  EXPECT_EQ(covered.size(), kAllSubtypes.size());
}

TEST(Patterns, LexicalLeadsTo) {
  auto d = one_sentence_doc("The lockdown leads to unemployment in Ohio.");
  auto events = lexicon_tag_events(d.sentences[0], lexicon(), d.id);
  auto ps = parse_patterns("lexical: X leads to Y => Cause\n");
  auto rs = match_patterns(d, d.sentences[0], events, ps, {});
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].type, RelationType::Causes);
  EXPECT_EQ(rs[0].evidence, "The lockdown leads to unemployment in Ohio.");
  EXPECT_EQ(rs[0].evidence.substr(rs[0].left_chars.begin, rs[0].left_chars.end - rs[0].left_chars.begin), "lockdown");
  EXPECT_EQ(rs[0].evidence.substr(rs[0].right_chars.begin, rs[0].right_chars.end - rs[0].right_chars.begin),
            "unemployment");
  EXPECT_EQ(rs[0].published_month, (YearMonth{2020, 3}));
  EXPECT_EQ(rs[0].provenance, std::set<Provenance>{Provenance::pattern});
}

TEST(Patterns, ReverseSwapsArguments) {
  auto d = one_sentence_doc("Panic buying after the lockdown.");
  auto events = lexicon_tag_events(d.sentences[0], lexicon(), d.id);
  ASSERT_EQ(events.size(), 2u);
  auto ps = parse_patterns("lexical: X after the Y => BeforeAfter reverse\n");
  auto rs = match_patterns(d, d.sentences[0], events, ps, {});
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].left_type, "Lockdown");
  EXPECT_EQ(rs[0].right_type, "FearOrPanic");
}

TEST(Patterns, NoMatchAcrossExtraWords) {
  auto d = one_sentence_doc("The lockdown quickly leads to unemployment.");
  auto events = lexicon_tag_events(d.sentences[0], lexicon(), d.id);
  auto ps = parse_patterns("lexical: X leads to Y => Cause\n");
  EXPECT_TRUE(match_patterns(d, d.sentences[0], events, ps, {}).empty());
}

// ---------------------------------------------------------------------------
// Propositions

TEST(Svo, SubjectVerbObject) {
  auto s = make_sentence("Lockdown caused unemployment.");
  auto g = extract_svo_propositions(s);
  std::set<std::tuple<std::string, std::string, std::size_t>> got;
  for (const auto& t : g) got.insert({t.lemma, t.role, t.argument.begin});
  EXPECT_TRUE(got.count({"cause", "subject", 0}));
  EXPECT_TRUE(got.count({"cause", "object", 2}));
}

TEST(Svo, PrepositionalArgument) {
  auto s = make_sentence("The lockdown led to mass unemployment.");
  auto g = extract_svo_propositions(s);
  bool found = false;
  for (const auto& t : g) found = found || (t.lemma == "lead" && t.role == "prep_to" && t.argument.begin == 5);
  EXPECT_TRUE(found);
}

TEST(Svo, NoPredicateMeansNoPropositions) {
  EXPECT_TRUE(extract_svo_propositions(make_sentence("Panic.")).empty());
}

TEST(Svo, SuppliedTriplesPassThrough) {
  auto s = make_sentence("Officials said lockdown hurt tourism.");
  std::vector<PropositionTriple> triples = {{0, {3, 4}, "subject", {2, 3}}, {0, {3, 4}, "object", {4, 5}},
                                            {1, {0, 1}, "subject", {1, 2}}};
  auto g = extract_svo_propositions(s, triples);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].lemma, "hurt");
  EXPECT_EQ(g[0].role, "subject");
  EXPECT_EQ(g[1].argument, (TokenSpan{4, 5}));
}

TEST(Svo, PropositionPatternMatches) {
  auto d = one_sentence_doc("The lockdown in Ohio caused unemployment.");
  auto events = lexicon_tag_events(d.sentences[0], lexicon(), d.id);
  auto props = extract_svo_propositions(d.sentences[0]);
  auto ps = parse_patterns("prop: cause[subject=X][object=Y] => Cause\n");
  auto rs = match_patterns(d, d.sentences[0], events, ps, props);
  // nearest content word before "caused" is "Ohio", not the trigger
  EXPECT_TRUE(rs.empty());
  auto d2 = one_sentence_doc("The lockdown caused unemployment.");
  auto e2 = lexicon_tag_events(d2.sentences[0], lexicon(), d2.id);
  auto rs2 = match_patterns(d2, d2.sentences[0], e2, ps, extract_svo_propositions(d2.sentences[0]));
  ASSERT_EQ(rs2.size(), 1u);
  EXPECT_EQ(rs2[0].left_type, "Lockdown");
}

// The library matcher and the regex oracle agree on every sentence of the
// fixture corpus, as multisets.
TEST(Patterns, FixtureMatchesBruteForce) {
  const auto text = read_file(source_path("data/patterns.txt"));
  const auto compiled = parse_patterns(text);
  const auto raw = oracle::parse_patterns(text);
  ASSERT_EQ(compiled.size(), raw.size());
  auto docs = ingest_documents_file(source_path("data/corpus/fixture.jsonl")).documents;
  ASSERT_GE(docs.size(), 50u);
  std::size_t total = 0;
  for (auto& raw_doc : docs) {
    auto d = segment_document(raw_doc);
    for (const auto& s : d.sentences) {
      auto events = lexicon_tag_events(s, lexicon(), d.id);
      auto props = extract_svo_propositions(s, d.propositions);
      auto got = keys(match_patterns(d, s, events, compiled, props));
      auto want = oracle::match_patterns(s, events, raw, props);
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      EXPECT_EQ(got, want) << d.id << " sentence " << s.index;
      total += got.size();
    }
  }
  EXPECT_GT(total, 50u);
}

// ---------------------------------------------------------------------------
// Neural path

TEST(Neural, MentionPoolAverages) {
  std::vector<Vector> tv = {{1, 2}, {3, 4}, {5, 9}};
  EXPECT_EQ(mention_pool(tv, {1, 3}), (Vector{4, 6.5}));
  EXPECT_EQ(mention_pool(tv, {0, 1}), (Vector{1, 2}));
  EXPECT_THROW(mention_pool(tv, {1, 1}), Error);
  EXPECT_THROW(mention_pool(tv, {2, 4}), Error);
}

TEST(Neural, PairRepresentationHandFormula) {
  auto rep = pair_representation({1, -2, 3}, {0.5, 4, 3});
  EXPECT_EQ(rep.v1, (Vector{1, -2, 3}));
  EXPECT_EQ(rep.v2, (Vector{0.5, 4, 3}));
  EXPECT_EQ(rep.v, (Vector{1, -2, 3, 0.5, 4, 3, 0.5, 6, 0}));
  EXPECT_THROW(pair_representation({1}, {1, 2}), Error);
}

TEST(Neural, SoftmaxSumsToOne) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    RelationClassifier c(6);
    for (auto& row : c.weights())
      for (auto& w : row) w = u(rng);
    for (auto& b : c.bias()) b = u(rng);
    Vector v(6);
    for (auto& x : v) x = u(rng);
    auto p = c.probabilities(v);
    double sum = 0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      EXPECT_TRUE(std::isfinite(x));
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(Neural, ZeroModelIsUniformAndPicksNoRelation) {
  RelationClassifier c(3);
  auto pred = classify_pair(c, pair_representation({1}, {2}));
  EXPECT_FALSE(pred.subtype);
  EXPECT_NEAR(pred.probability, 1.0 / kNumRelationLabels, 1e-12);
}

TEST(Neural, ClassifierFitsFixture) {
  HashedNgramProvider provider;
  auto data = load_relation_examples(source_path("data/train/relations.jsonl"), provider);
  ASSERT_FALSE(data.empty());
  auto c = train_relation_classifier(data, {.epochs = 50});
  std::size_t correct = 0;
  for (const auto& ex : data) {
    auto probs = c.probabilities(ex.representation);
    correct += static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin()) == ex.label;
  }
  EXPECT_EQ(correct, data.size());
  auto again = train_relation_classifier(data, {.epochs = 50});
  EXPECT_TRUE(again == c);
  auto back = RelationClassifier::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_TRUE(back == c);
}

TEST(Neural, ThresholdFiltersPredictions) {
  HashedNgramProvider provider;
  auto data = load_relation_examples(source_path("data/train/relations.jsonl"), provider);
  auto c = train_relation_classifier(data);
  auto d = one_sentence_doc("The lockdown caused unemployment.");
  auto events = lexicon_tag_events(d.sentences[0], lexicon(), d.id);
  auto loose = neural_extract(d, d.sentences[0], events, c, provider, 0.0);
  auto none = neural_extract(d, d.sentences[0], events, c, provider, 1.1);
  EXPECT_TRUE(none.empty());
  for (const auto& r : loose) {
    EXPECT_EQ(r.provenance, std::set<Provenance>{Provenance::neural});
    EXPECT_GT(r.confidence, 0.0);
    EXPECT_LE(r.confidence, 1.0);
  }
}

// ---------------------------------------------------------------------------
// Union

namespace {

RelationMention rel(std::string l, std::string r, RelationSubtype st, Provenance p, double conf) {
  RelationMention m;
  m.left_event = l;
  m.right_event = r;
  m.subtype = st;
  m.type = merge_subtype_to_type(st);
  m.id = relation_id(l, m.type, r);
  m.doc_id = "d";
  m.provenance = {p};
  m.confidence = conf;
  return m;
}

}  // namespace

TEST(Union, MergesSameKey) {
  std::vector<RelationMention> a = {rel("x", "y", RelationSubtype::Cause, Provenance::pattern, 1.0)};
  std::vector<RelationMention> b = {rel("x", "y", RelationSubtype::Catalyst, Provenance::neural, 0.95),
                                    rel("x", "y", RelationSubtype::Mitigation, Provenance::neural, 0.97)};
  auto u = union_and_dedup(a, b);
  ASSERT_EQ(u.size(), 2u);
  const auto& causes = u[0].type == RelationType::Causes ? u[0] : u[1];
  EXPECT_EQ(causes.provenance, (std::set<Provenance>{Provenance::pattern, Provenance::neural}));
  EXPECT_EQ(causes.confidence, 1.0);
  EXPECT_EQ(causes.subtype, RelationSubtype::Cause);
}

TEST(Union, EqualConfidenceTieGoesToEarlierSubtype) {
  std::vector<RelationMention> a = {rel("x", "y", RelationSubtype::Precondition, Provenance::pattern, 1.0)};
  std::vector<RelationMention> b = {rel("x", "y", RelationSubtype::Catalyst, Provenance::pattern, 1.0)};
  EXPECT_EQ(union_and_dedup(a, b)[0].subtype, RelationSubtype::Catalyst);
  EXPECT_EQ(union_and_dedup(b, a)[0].subtype, RelationSubtype::Catalyst);
}

TEST(Union, IsCommutativeAndIdempotent) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> ids = {"a", "b", "c"};
  auto render = [](const std::vector<RelationMention>& rs) {
    std::string out;
    for (const auto& r : rs) {
      out += r.id + "/" + std::string(to_string(r.subtype)) + "/" + std::to_string(r.confidence) + "/";
      for (auto p : r.provenance) out += std::string(to_string(p));
      out += ";";
    }
    return out;
  };
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RelationMention> a, b;
    for (int k = 0; k < 6; ++k) {
      auto st = kAllSubtypes[rng() % kAllSubtypes.size()];
      auto& dst = rng() % 2 ? a : b;
      dst.push_back(rel(ids[rng() % 3], ids[rng() % 3], st, rng() % 2 ? Provenance::pattern : Provenance::neural,
                        0.9 + 0.05 * static_cast<double>(rng() % 3)));
    }
    auto ab = union_and_dedup(a, b);
    EXPECT_EQ(render(ab), render(union_and_dedup(b, a)));
    EXPECT_EQ(render(union_and_dedup(ab, {})), render(ab));
    std::set<std::tuple<std::string, std::string, RelationType>> seen;
    for (const auto& r : ab) EXPECT_TRUE(seen.insert({r.left_event, r.right_event, r.type}).second);
  }
}
