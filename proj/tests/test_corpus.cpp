#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "excavator/corpus.hpp"
#include "support.hpp"

using namespace excavator;
using testing_support::source_path;

namespace {

std::vector<std::string> texts(const Sentence& s) {
  std::vector<std::string> out;
  for (const auto& t : s.tokens) out.push_back(t.text);
  return out;
}

Document doc_with_body(std::string body) {
  Document d;
  d.id = "x";
  d.body = std::move(body);
  return segment_document(std::move(d));
}

}  // namespace

TEST(YearMonth, ParseTruncatesDates) {
  EXPECT_EQ(YearMonth::parse("2020-03-15"), (YearMonth{2020, 3}));
  EXPECT_EQ(YearMonth::parse("2020-03-15T08:00:00Z"), (YearMonth{2020, 3}));
  EXPECT_EQ(YearMonth::parse("2020-12"), (YearMonth{2020, 12}));
  EXPECT_FALSE(YearMonth::parse("2020-13-01"));
  EXPECT_FALSE(YearMonth::parse("March 2020"));
  EXPECT_FALSE(YearMonth::parse(""));
}

TEST(YearMonth, ArithmeticCrossesYears) {
  EXPECT_EQ((YearMonth{2020, 1}).plus(-1), (YearMonth{2019, 12}));
  EXPECT_EQ((YearMonth{2019, 12}).plus(1), (YearMonth{2020, 1}));
  EXPECT_EQ((YearMonth{2020, 5}).plus(-17), (YearMonth{2018, 12}));
  EXPECT_EQ((YearMonth{2020, 5}).str(), "2020-05");
}

TEST(Ingest, DateTruncatesToMonth) {
  std::istringstream in(R"({"id":"d1","published_at":"2020-03-15","kind":"news","body":"Lockdown began."})");
  auto r = ingest_documents(in);
  ASSERT_EQ(r.documents.size(), 1u);
  EXPECT_EQ(r.documents[0].published_month, (YearMonth{2020, 3}));
  EXPECT_EQ(r.skipped, 0u);
}

TEST(Ingest, EmptyStream) {
  std::istringstream in("");
  auto r = ingest_documents(in);
  EXPECT_TRUE(r.documents.empty());
  EXPECT_EQ(r.skipped, 0u);
}

TEST(Ingest, MissingBodyIsSkipped) {
  auto r = ingest_documents_file(source_path("tests/data/ingest_small.jsonl"));
  ASSERT_EQ(r.documents.size(), 3u);
  EXPECT_EQ(r.skipped, 1u);
  EXPECT_EQ(r.skipped_lines, std::vector<std::size_t>{4});
  EXPECT_EQ(r.documents[1].kind, DocumentKind::scholarly);
}

TEST(Ingest, MostlyMalformedIsFatal) {
  std::istringstream in("{\"id\":\"a\",\"kind\":\"news\",\"body\":\"x\"}\nnot json\n{\"id\":\"b\"}\n");
  EXPECT_THROW(ingest_documents(in), Error);
}

TEST(Ingest, HalfMalformedIsTolerated) {
  std::istringstream in("{\"id\":\"a\",\"kind\":\"news\",\"body\":\"x\"}\nnot json\n");
  auto r = ingest_documents(in);
  EXPECT_EQ(r.documents.size(), 1u);
  EXPECT_EQ(r.skipped, 1u);
}

TEST(Ingest, DuplicateIdIsSkipped) {
  std::istringstream in(
      "{\"id\":\"a\",\"kind\":\"news\",\"body\":\"x\"}\n{\"id\":\"a\",\"kind\":\"news\",\"body\":\"y\"}\n"
      "{\"id\":\"b\",\"kind\":\"news\",\"body\":\"z\"}\n");
  auto r = ingest_documents(in);
  ASSERT_EQ(r.documents.size(), 2u);
  EXPECT_EQ(r.documents[0].body, "x");
  EXPECT_EQ(r.skipped, 1u);
}

TEST(Ingest, MissingDateKeepsDocumentWithoutMonth) {
  std::istringstream in("{\"id\":\"a\",\"kind\":\"news\",\"body\":\"x\"}\n");
  auto r = ingest_documents(in);
  ASSERT_EQ(r.documents.size(), 1u);
  EXPECT_FALSE(r.documents[0].published_month);
  auto stats = monthly_article_counts(r.documents);
  EXPECT_TRUE(stats.articles_per_month.empty());
  EXPECT_EQ(stats.missing_month, 1u);
}

TEST(Ingest, Idempotent) {
  auto a = ingest_documents_file(source_path("data/corpus/fixture.jsonl"));
  auto b = ingest_documents_file(source_path("data/corpus/fixture.jsonl"));
  ASSERT_EQ(a.documents.size(), b.documents.size());
  for (std::size_t i = 0; i < a.documents.size(); ++i) {
    EXPECT_EQ(a.documents[i].id, b.documents[i].id);
    EXPECT_EQ(a.documents[i].body, b.documents[i].body);
    EXPECT_EQ(a.documents[i].propositions, b.documents[i].propositions);
  }
}

TEST(Segment, TwoSentences) {
  auto d = doc_with_body("Lockdown began. Deaths fell.");
  ASSERT_EQ(d.sentences.size(), 2u);
  EXPECT_EQ(texts(d.sentences[0]), (std::vector<std::string>{"Lockdown", "began", "."}));
  EXPECT_EQ(texts(d.sentences[1]), (std::vector<std::string>{"Deaths", "fell", "."}));
  EXPECT_EQ(d.sentences[1].index, 1u);
  EXPECT_EQ(d.sentences[1].text, "Deaths fell.");
}

TEST(Segment, SingleToken) {
  auto d = doc_with_body("covid");
  ASSERT_EQ(d.sentences.size(), 1u);
  EXPECT_EQ(texts(d.sentences[0]), std::vector<std::string>{"covid"});
}

TEST(Segment, AbbreviationDoesNotBreak) {
  auto d = doc_with_body("Dr. Smith spoke.");
  ASSERT_EQ(d.sentences.size(), 1u);
  EXPECT_EQ(texts(d.sentences[0]), (std::vector<std::string>{"Dr.", "Smith", "spoke", "."}));
}

TEST(Segment, LowercaseAfterPeriodDoesNotBreak) {
  auto d = doc_with_body("Cases rose 3.5 percent. in March. Then fell.");
  ASSERT_EQ(d.sentences.size(), 2u);
  EXPECT_EQ(d.sentences[0].text, "Cases rose 3.5 percent. in March.");
}

TEST(Segment, HyphenatedAndNumericTokensStayWhole) {
  auto toks = tokenize("COVID-19 cases in U.S. hit 1,000 (record).");
  std::vector<std::string> got;
  for (const auto& t : toks) got.push_back(t.text);
  EXPECT_EQ(got, (std::vector<std::string>{"COVID-19", "cases", "in", "U.S.", "hit", "1", ",", "000", "(", "record",
                                           ")", "."}));
}

// Token char spans index the body, stay ordered and inside their sentence,
// and never cross a sentence boundary.
TEST(Segment, SpansReconstructBodyOnFixture) {
  auto r = ingest_documents_file(source_path("data/corpus/fixture.jsonl"));
  for (auto& raw : r.documents) {
    auto d = segment_document(raw);
    std::size_t last_end = 0;
    for (const auto& s : d.sentences) {
      EXPECT_LE(last_end, s.char_span.begin);
      EXPECT_EQ(d.body.substr(s.char_span.begin, s.char_span.end - s.char_span.begin), s.text);
      for (const auto& t : s.tokens) {
        EXPECT_LT(t.char_span.begin, t.char_span.end);
        EXPECT_LE(s.char_span.begin, t.char_span.begin);
        EXPECT_LE(t.char_span.end, s.char_span.end);
        EXPECT_LE(last_end, t.char_span.begin);
        EXPECT_EQ(d.body.substr(t.char_span.begin, t.char_span.end - t.char_span.begin), t.text);
        EXPECT_EQ(t.lowercase, to_lower(t.text));
        last_end = t.char_span.end;
      }
    }
  }
}

TEST(Stats, CountsPerMonth) {
  std::vector<Document> docs(3);
  docs[0].published_month = YearMonth{2020, 1};
  docs[1].published_month = YearMonth{2020, 1};
  docs[2].published_month = YearMonth{2020, 2};
  auto s = monthly_article_counts(docs);
  EXPECT_EQ(s.articles_per_month, (std::map<YearMonth, std::size_t>{{{2020, 1}, 2}, {{2020, 2}, 1}}));
  EXPECT_EQ(s.documents, 3u);
}

TEST(Stats, EmptyInput) {
  auto s = monthly_article_counts(std::vector<Document>{});
  EXPECT_TRUE(s.articles_per_month.empty());
}

// Independent count: scan the raw file for "published_at" prefixes.
TEST(Stats, FixtureMatchesRawLineCount) {
  std::ifstream in(source_path("data/corpus/fixture.jsonl"));
  std::map<std::string, std::size_t> raw;
  std::size_t lines = 0, undated = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lines;
    auto pos = line.find("\"published_at\": \"");
    if (pos == std::string::npos) {
      ++undated;
      continue;
    }
    raw[line.substr(pos + 17, 7)] += 1;
  }
  auto r = ingest_documents_file(source_path("data/corpus/fixture.jsonl"));
  auto s = monthly_article_counts(r.documents);
  std::map<std::string, std::size_t> got;
  std::size_t total = 0;
  for (const auto& [m, n] : s.articles_per_month) {
    got[m.str()] = n;
    total += n;
  }
  EXPECT_EQ(got, raw);
  EXPECT_EQ(s.missing_month, undated);
  EXPECT_EQ(total + s.missing_month, r.documents.size());
  EXPECT_GE(lines, 50u);
}
