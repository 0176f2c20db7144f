// Copyright 2026 The rankdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "rankdistill/lexical.hpp"
#include "rankdistill/random.hpp"

using namespace rankdistill;
using namespace rankdistill::lexical;

namespace {

std::map<DocId, std::string> corpus(std::initializer_list<std::pair<const char*, const char*>> rows) {
  std::map<DocId, std::string> c;
  for (auto [id, text] : rows) c.emplace(DocId(id), text);
  return c;
}

// Straight transcription of the scoring formula, one document at a time.
double brute_bm25(const std::vector<std::vector<std::string>>& docs, std::size_t d, const std::vector<std::string>& q,
                  double k1, double b) {
  double avg = 0.0;
  for (const auto& x : docs) avg += static_cast<double>(x.size());
  avg /= static_cast<double>(docs.size());
  const double n = static_cast<double>(docs.size());
  double s = 0.0;
  for (const auto& t : q) {
    double df = 0.0;
    for (const auto& x : docs) df += std::count(x.begin(), x.end(), t) > 0 ? 1.0 : 0.0;
    if (df == 0.0) continue;
    const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    s += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * static_cast<double>(docs[d].size()) / avg));
  }
  return s;
}

}  // namespace

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("The Cat, the cat!"), (std::vector<std::string>{"the", "cat", "the", "cat"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("BM25-score_42"), (std::vector<std::string>{"bm25", "score", "42"}));
}

TEST(Index, SingleDocTermFrequencies) {
  auto idx = InvertedIndex::build(corpus({{"d", "a a b"}}));
  EXPECT_EQ(idx.postings("a").at(0).tf, 2u);
  EXPECT_EQ(idx.postings("b").at(0).tf, 1u);
  EXPECT_DOUBLE_EQ(idx.avgdl(), 3.0);
}

TEST(Index, AverageLength) {
  auto idx = InvertedIndex::build(corpus({{"x", "a b"}, {"y", "a b c d"}}));
  EXPECT_DOUBLE_EQ(idx.avgdl(), 3.0);
  EXPECT_EQ(idx.size(), 2u);
}

TEST(Index, EmptyCorpusRejected) { EXPECT_THROW(InvertedIndex::build(std::map<DocId, std::string>{}), Error); }

TEST(Index, PostingsReconstructTermFrequencies) {
  Rng rng(3);
  std::map<DocId, std::string> c;
  for (int i = 0; i < 40; ++i) {
    std::string t;
    const auto len = 1 + uniform_index(rng, 20);
    for (std::size_t k = 0; k < len; ++k) t += "t" + std::to_string(uniform_index(rng, 15)) + " ";
    c.emplace(DocId("d" + std::to_string(i)), t);
  }
  auto idx = InvertedIndex::build(c);
  for (const auto& [id, text] : c) {
    std::map<std::string, std::uint32_t> counts;
    for (const auto& t : tokenize(text)) ++counts[t];
    const auto internal = idx.internal_id(id);
    for (const auto& [term, tf] : counts) {
      const auto& pl = idx.postings(term);
      auto it = std::find_if(pl.begin(), pl.end(), [&](const Posting& p) { return p.doc == internal; });
      ASSERT_NE(it, pl.end());
      EXPECT_EQ(it->tf, tf);
    }
  }
  for (std::size_t t = 0; t < 15; ++t) {
    const auto& pl = idx.postings("t" + std::to_string(t));
    EXPECT_TRUE(std::is_sorted(pl.begin(), pl.end(), [](auto& a, auto& b) { return a.doc < b.doc; }));
  }
}

TEST(Index, SnapshotRoundTrip) {
  auto idx = InvertedIndex::build(corpus({{"x", "a b b"}, {"y", "c a"}}));
  auto back = InvertedIndex::from_snapshot(idx.snapshot());
  EXPECT_EQ(back.snapshot(), idx.snapshot());
  EXPECT_DOUBLE_EQ(back.avgdl(), idx.avgdl());
  EXPECT_EQ(back.internal_id(DocId("y")), 1u);
}

TEST(Bm25, HandEvaluatedSingleTerm) {
  // N=2, df=1, tf=1, both docs of equal length: score = ln 2.
  auto idx = InvertedIndex::build(corpus({{"x", "apple pear"}, {"y", "plum fig"}}));
  auto top = bm25_topk(idx, {}, QueryId("q"), "apple", 5);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_NEAR(top[0].score, 0.693147, 1e-6);
}

TEST(Bm25, AbsentTermsGiveEmptyList) {
  auto idx = InvertedIndex::build(corpus({{"x", "apple"}}));
  EXPECT_TRUE(bm25_topk(idx, {}, QueryId("q"), "banana", 5).empty());
}

TEST(Bm25, HigherTfRankedFirst) {
  auto idx = InvertedIndex::build(corpus({{"x", "cat cat cat dog"}, {"y", "cat dog dog dog"}, {"z", "eel"}}));
  auto top = bm25_topk(idx, {}, QueryId("q"), "cat", 5);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].doc.str(), "x");
  EXPECT_GT(top[0].score, top[1].score);
}

TEST(Bm25, ExcludedDocsNeverReturned) {
  auto idx = InvertedIndex::build(corpus({{"x", "cat"}, {"y", "cat cat"}}));
  auto top = bm25_topk(idx, {}, QueryId("q"), "cat", 5, {DocId("y")});
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].doc.str(), "x");
}

TEST(Bm25, FullDepthMatchesBruteForce) {
  Rng rng(11);
  std::vector<std::vector<std::string>> docs;
  std::map<DocId, std::string> c;
  for (int i = 0; i < 60; ++i) {
    std::string t;
    const auto len = 1 + uniform_index(rng, 30);
    for (std::size_t k = 0; k < len; ++k) t += "w" + std::to_string(uniform_index(rng, 25)) + " ";
    c.emplace(DocId("d" + std::to_string(100 + i)), t);
  }
  for (const auto& [id, text] : c) docs.push_back(tokenize(text));
  auto idx = InvertedIndex::build(c);
  for (double b : {0.0, 0.75, 1.0}) {
    Bm25Params p{1.2, b};
    const std::string q = "w1 w3 w3 w7 w24";
    auto top = bm25_topk(idx, p, QueryId("q"), q, idx.size());
    for (const auto& e : top.entries()) {
      const auto d = idx.internal_id(e.doc);
      EXPECT_NEAR(e.score, brute_bm25(docs, d, tokenize(q), 1.2, b), 1e-12);
    }
    for (std::size_t i = 1; i < top.size(); ++i) EXPECT_TRUE(ranks_before(top[i - 1], top[i]));
  }
}

TEST(Bm25, MonotoneInTermFrequency) {
  std::vector<double> scores;
  for (int tf = 1; tf <= 6; ++tf) {
    std::string text;
    for (int i = 0; i < 8; ++i) text += i < tf ? "cat " : "pad ";
    auto idx = InvertedIndex::build(corpus({{"x", text.c_str()}, {"y", "dog dog dog dog dog dog dog dog"}}));
    scores.push_back(bm25_topk(idx, {}, QueryId("q"), "cat", 1)[0].score);
  }
  for (std::size_t i = 1; i < scores.size(); ++i) EXPECT_GE(scores[i], scores[i - 1]);
}

TEST(Bm25, LengthIndependentWhenBIsZero) {
  Bm25Params p{1.2, 0.0};
  auto a = InvertedIndex::build(corpus({{"x", "cat pad"}, {"y", "dog"}}));
  auto b = InvertedIndex::build(corpus({{"x", "cat pad pad pad pad"}, {"y", "dog"}}));
  EXPECT_DOUBLE_EQ(bm25_topk(a, p, QueryId("q"), "cat", 1)[0].score, bm25_topk(b, p, QueryId("q"), "cat", 1)[0].score);
}

TEST(Bm25, ParamsValidated) {
  auto idx = InvertedIndex::build(corpus({{"x", "cat"}}));
  EXPECT_THROW(bm25_topk(idx, {1.2, 1.5}, QueryId("q"), "cat", 1), Error);
  EXPECT_THROW(bm25_topk(idx, {-1.0, 0.5}, QueryId("q"), "cat", 1), Error);
  EXPECT_THROW(bm25_topk(idx, {}, QueryId("q"), "cat", 0), Error);
}
