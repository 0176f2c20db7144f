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
#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "rankdistill/selection.hpp"

using namespace rankdistill;

namespace {

// Twenty documents over a small vocabulary; doc i mentions "alpha" i % 4 + 1
// times so bm25 spreads them out.
struct Toy {
  lexical::InvertedIndex index;
  std::map<DocId, double> teacher;
  EmbeddingTable emb{2};
  CorpusHandles handles;

  Toy() {
    std::vector<std::pair<DocId, std::string>> corpus;
    for (int i = 0; i < 20; ++i) {
      std::string text;
      for (int r = 0; r <= i % 4; ++r) text += "alpha ";
      text += (i % 2 ? "beta" : "gamma");
      text += " filler" + std::to_string(i);
      const DocId d(std::string(1, 'd') + (i < 10 ? "0" : "") + std::to_string(i));
      corpus.emplace_back(d, text);
      teacher[d] = static_cast<double>((i * 7) % 20);
      emb.insert(d.str(), {std::cos(i * 0.3), std::sin(i * 0.3)});
    }
    index = lexical::InvertedIndex::build(corpus);
    handles.index = &index;
    handles.teacher = [this](const QueryId&, const DocId& d) { return teacher.at(d); };
    handles.embeddings = &emb;
  }
};

const Query kQuery{QueryId("q1"), "alpha beta"};
const DocId kPositive("d05");

TrainingGroup entropy_group(double h) {
  TrainingGroup g;
  g.query_id = QueryId("q" + std::to_string(h));
  g.doc_ids = {DocId("a")};
  g.teacher_scores = std::vector<double>{h};
  return g;
}

const EntropyFn kFirstScore = [](const TrainingGroup& g) { return g.teacher_scores->front(); };

}  // namespace

TEST(Samplers, NeverReturnPositiveAndDistinct) {
  Toy t;
  for (auto kind : {SamplerKind::random, SamplerKind::bm25, SamplerKind::teacher, SamplerKind::ensemble}) {
    SamplerSpec s;
    s.kind = kind;
    s.k = 8;
    s.pool_depth = 12;
    s.ensemble_depth = 12;
    const auto out = sample_negatives(s, kQuery, kPositive, t.handles);
    EXPECT_EQ(out.size(), 8u) << to_string(kind);
    EXPECT_EQ(std::set<DocId>(out.begin(), out.end()).size(), out.size());
    EXPECT_EQ(std::count(out.begin(), out.end(), kPositive), 0);
  }
}

TEST(Samplers, RandomDeterministicPerSeed) {
  Toy t;
  SamplerSpec s;
  s.k = 6;
  s.seed = 3;
  const auto a = sample_negatives(s, kQuery, kPositive, t.handles);
  EXPECT_EQ(a, sample_negatives(s, kQuery, kPositive, t.handles));
  s.seed = 4;
  EXPECT_NE(a, sample_negatives(s, kQuery, kPositive, t.handles));
}

TEST(Samplers, Bm25MatchesTopk) {
  Toy t;
  SamplerSpec s;
  s.kind = SamplerKind::bm25;
  s.k = 5;
  const auto out = sample_negatives(s, kQuery, kPositive, t.handles);
  const auto ref = lexical::bm25_topk(t.index, {}, kQuery.id, kQuery.text, 5, {kPositive});
  ASSERT_EQ(ref.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(out[i], ref.entries()[i].doc);
}

TEST(Samplers, TeacherWithFullPoolIsBm25PoolReordered) {
  Toy t;
  SamplerSpec s;
  s.kind = SamplerKind::teacher;
  s.k = 6;
  s.pool_depth = 6;
  const auto out = sample_negatives(s, kQuery, kPositive, t.handles);
  s.kind = SamplerKind::bm25;
  const auto b = sample_negatives(s, kQuery, kPositive, t.handles);
  EXPECT_EQ(std::set<DocId>(out.begin(), out.end()), std::set<DocId>(b.begin(), b.end()));
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_GE(t.teacher.at(out[i - 1]), t.teacher.at(out[i]));
}

TEST(Samplers, EnsembleEqualsSetAlgebraOracle) {
  Toy t;
  SamplerSpec s;
  s.kind = SamplerKind::ensemble;
  s.k = 4;
  s.pool_depth = 10;
  s.ensemble_depth = 6;
  s.constituents = {SamplerKind::bm25, SamplerKind::random};
  s.seed = 11;
  s.epsilon = 2.5;

  SamplerSpec b = s;
  b.kind = SamplerKind::bm25;
  b.k = 6;
  SamplerSpec r = s;
  r.kind = SamplerKind::random;
  r.k = 6;
  std::set<DocId> pool;
  for (const auto& d : sample_negatives(b, kQuery, kPositive, t.handles)) pool.insert(d);
  for (const auto& d : sample_negatives(r, kQuery, kPositive, t.handles)) pool.insert(d);
  const double gp = t.teacher.at(kPositive);
  std::vector<std::pair<double, DocId>> kept;
  for (const auto& d : pool)
    if (std::abs(t.teacher.at(d) - gp) > 2.5) kept.emplace_back(-t.teacher.at(d), d);
  std::sort(kept.begin(), kept.end());
  std::vector<DocId> expected;
  for (std::size_t i = 0; i < 4; ++i) expected.push_back(kept[i].second);

  EXPECT_EQ(sample_negatives(s, kQuery, kPositive, t.handles), expected);
}

TEST(Samplers, EnsembleEmbeddingFilter) {
  Toy t;
  SamplerSpec s;
  s.kind = SamplerKind::ensemble;
  s.k = 3;
  s.pool_depth = 19;
  s.ensemble_depth = 19;
  s.constituents = {SamplerKind::teacher};
  s.distance = FilterDistance::embedding;
  s.epsilon = 0.2;
  const auto& pv = t.emb.at(kPositive.str());
  for (const auto& d : sample_negatives(s, kQuery, kPositive, t.handles))
    EXPECT_GT(cosine_distance(t.emb.at(d.str()), pv), 0.2);
}

TEST(Samplers, HugeEpsilonFailsNamingQuery) {
  Toy t;
  SamplerSpec s;
  s.kind = SamplerKind::ensemble;
  s.k = 3;
  s.epsilon = std::numeric_limits<double>::infinity();
  try {
    sample_negatives(s, kQuery, kPositive, t.handles);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::validation);
    EXPECT_NE(std::string(e.what()).find("q1"), std::string::npos);
  }
}

TEST(Samplers, ShortPoolFails) {
  Toy t;
  SamplerSpec s;
  s.kind = SamplerKind::random;
  s.k = 20;  // only 19 non-positive documents
  s.pool_depth = 20;
  s.ensemble_depth = 20;
  EXPECT_THROW(sample_negatives(s, kQuery, kPositive, t.handles), Error);
}

TEST(Samplers, ConfigErrors) {
  EXPECT_THROW(parse_sampler_kind("hard"), Error);
  SamplerSpec s;
  s.kind = SamplerKind::ensemble;
  s.constituents = {SamplerKind::ensemble};
  EXPECT_THROW(s.validate(), Error);
  s.constituents = {};
  EXPECT_THROW(s.validate(), Error);
}

TEST(Quartile, OneToEight) {
  std::vector<TrainingGroup> gs;
  for (int i = 1; i <= 8; ++i) gs.push_back(entropy_group(i));
  auto values = [](const std::vector<TrainingGroup>& v) {
    std::vector<double> out;
    for (const auto& g : v) out.push_back(g.teacher_scores->front());
    return out;
  };
  // Q1 = 2.75, Q3 = 6.25 by linear interpolation.
  EXPECT_EQ(values(quartile_filter(gs, QuartileBand::inner, kFirstScore)), (std::vector<double>{3, 4, 5, 6}));
  EXPECT_EQ(values(quartile_filter(gs, QuartileBand::lower, kFirstScore)), (std::vector<double>{1, 2}));
  EXPECT_EQ(values(quartile_filter(gs, QuartileBand::upper, kFirstScore)), (std::vector<double>{7, 8}));
  EXPECT_EQ(values(quartile_filter(gs, QuartileBand::outlier, kFirstScore)), (std::vector<double>{1, 2, 7, 8}));
}

TEST(Quartile, BandsPartitionRandomInput) {
  Rng rng(5);
  std::vector<TrainingGroup> gs;
  for (int i = 0; i < 57; ++i) gs.push_back(entropy_group(std::round(normal(rng) * 4) / 4));
  const auto inner = quartile_filter(gs, QuartileBand::inner, kFirstScore).size();
  const auto outlier = quartile_filter(gs, QuartileBand::outlier, kFirstScore).size();
  const auto lower = quartile_filter(gs, QuartileBand::lower, kFirstScore).size();
  const auto upper = quartile_filter(gs, QuartileBand::upper, kFirstScore).size();
  EXPECT_EQ(inner + outlier, gs.size());
  EXPECT_EQ(lower + upper, outlier);
}

TEST(Quartile, AllEqualIsAllInner) {
  std::vector<TrainingGroup> gs(6, entropy_group(1.5));
  EXPECT_EQ(quartile_filter(gs, QuartileBand::inner, kFirstScore).size(), 6u);
  EXPECT_TRUE(quartile_filter(gs, QuartileBand::outlier, kFirstScore).empty());
}

TEST(Quartile, DefaultEntropyUsesTeacherScores) {
  TrainingGroup g;
  g.query_id = QueryId("q");
  g.doc_ids = {DocId("a"), DocId("b")};
  EXPECT_THROW(quartile_filter({g}, QuartileBand::inner), Error);
  g.teacher_scores = std::vector<double>{0.0, 0.0};
  EXPECT_NEAR(listwise_entropy_fn()(g), std::log(2.0), 1e-12);
}

TEST(Quartile, EmptyRejectedAndBandNames) {
  EXPECT_THROW(quartile_filter({}, QuartileBand::inner), Error);
  for (auto b : {QuartileBand::lower, QuartileBand::inner, QuartileBand::upper, QuartileBand::outlier})
    EXPECT_EQ(parse_band(to_string(b)), b);
  EXPECT_THROW(parse_band("middle"), Error);
}
