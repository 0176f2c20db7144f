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
#include <filesystem>
#include <set>

#include <gtest/gtest.h>

#include "rankdistill/eval.hpp"
#include "rankdistill/io.hpp"
#include "rankdistill/lexical.hpp"
#include "rankdistill/synth.hpp"

using namespace rankdistill;
using synth::WorldConfig;

namespace {

WorldConfig small(std::uint64_t seed = 7) {
  WorldConfig c;
  c.n_docs = 200;
  c.n_queries = 20;
  c.seed = seed;
  return c;
}

std::vector<double> ranks_of(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = (static_cast<double>(i + j) / 2.0) + 1.0;
    i = j + 1;
  }
  return r;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Fraction of document pairs (per query) where the teacher orders them like
// the latent similarity.
double teacher_agreement(const synth::SyntheticWorld& w) {
  std::size_t agree = 0, total = 0;
  for (std::size_t q = 0; q < w.query_ids.size(); ++q)
    for (std::size_t i = 0; i < w.doc_ids.size(); ++i)
      for (std::size_t j = i + 1; j < w.doc_ids.size(); ++j) {
        ++total;
        if ((w.sim[q][i] > w.sim[q][j]) == (w.teacher(q, i) > w.teacher(q, j))) ++agree;
      }
  return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace

TEST(World, SameSeedSameBytes) {
  const auto a = synth::format_world(synth::generate(small()));
  const auto b = synth::format_world(synth::generate(small()));
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(a.embeddings, b.embeddings);
  EXPECT_EQ(a.qrels, b.qrels);
  EXPECT_EQ(a.queries, b.queries);
  EXPECT_NE(a.corpus, synth::format_world(synth::generate(small(8))).corpus);
}

TEST(World, ShapeAndIds) {
  const auto w = synth::generate(small());
  ASSERT_EQ(w.doc_ids.size(), 200u);
  ASSERT_EQ(w.query_ids.size(), 20u);
  EXPECT_EQ(w.doc_ids.front().str(), "d000");
  EXPECT_EQ(w.doc_ids.back().str(), "d199");
  EXPECT_EQ(w.query_ids.front().str(), "q00");
  for (const auto& v : w.doc_emb) {
    double n = 0;
    for (double x : v) n += x * x;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
  for (const auto& t : w.query_text) EXPECT_EQ(lexical::tokenize(t).size(), 6u);
  for (const auto& t : w.doc_text) {
    const auto n = lexical::tokenize(t).size();
    EXPECT_GE(n, 30u);
    EXPECT_LE(n, 80u);
  }
}

TEST(World, AllGradesPresent) {
  const auto w = synth::generate(WorldConfig{});
  std::set<int> seen;
  for (std::size_t q = 0; q < w.query_ids.size(); ++q)
    for (std::size_t d = 0; d < w.doc_ids.size(); ++d) seen.insert(w.grade(q, d));
  EXPECT_EQ(seen, (std::set<int>{0, 1, 2, 3}));
}

TEST(World, GradeThresholds) {
  EXPECT_EQ(synth::grade_of(0.85), 3);
  EXPECT_EQ(synth::grade_of(0.8499), 2);
  EXPECT_EQ(synth::grade_of(0.7), 2);
  EXPECT_EQ(synth::grade_of(0.5), 1);
  EXPECT_EQ(synth::grade_of(0.4999), 0);
  EXPECT_EQ(synth::grade_of(-1.0), 0);
}

TEST(World, NoiselessTeacherFollowsSimilarity) {
  auto c = small();
  c.teacher_noise = 0.0;
  const auto w = synth::generate(c);
  EXPECT_DOUBLE_EQ(teacher_agreement(w), 1.0);
}

TEST(World, TeacherAgreementFallsWithNoise) {
  double prev = 2.0;
  for (double noise : {0.0, 0.5, 2.0}) {
    auto c = small();
    c.teacher_noise = noise;
    const double a = teacher_agreement(synth::generate(c));
    EXPECT_LT(a, prev) << noise;
    prev = a;
  }
}

TEST(World, LexicalSignalTracksGrade) {
  const auto w = synth::generate(small());
  std::vector<std::pair<DocId, std::string>> corpus;
  for (std::size_t i = 0; i < w.doc_ids.size(); ++i) corpus.emplace_back(w.doc_ids[i], w.doc_text[i]);
  const auto index = lexical::InvertedIndex::build(corpus);
  double total = 0;
  for (std::size_t q = 0; q < w.query_ids.size(); ++q) {
    const auto s = lexical::bm25_scores(index, {}, w.query_text[q]);
    std::vector<double> bm(w.doc_ids.size()), grade(w.doc_ids.size());
    for (std::size_t d = 0; d < w.doc_ids.size(); ++d) {
      bm[d] = s[d];
      grade[d] = w.grade(q, d);
    }
    total += pearson(ranks_of(bm), ranks_of(grade));
  }
  EXPECT_GT(total / static_cast<double>(w.query_ids.size()), 0.0);
}

TEST(World, TeacherFromExportedEmbeddingsMatches) {
  const auto w = synth::generate(small());
  const auto path = (std::filesystem::temp_directory_path() / "rankdistill_synth_emb.tsv").string();
  write_text_file(path, synth::format_world(w).embeddings);
  const auto emb = parse_embeddings(path);
  const synth::Teacher t(w.config, emb);
  for (std::size_t q = 0; q < 3; ++q)
    for (std::size_t d = 0; d < w.doc_ids.size(); d += 17)
      EXPECT_NEAR(t(w.query_ids[q], w.doc_ids[d]), w.teacher(q, d), 1e-9);
}

TEST(World, QrelsOnlyPositiveGrades) {
  const auto w = synth::generate(small());
  const auto qrels = w.qrels();
  for (std::size_t q = 0; q < w.query_ids.size(); ++q)
    for (std::size_t d = 0; d < w.doc_ids.size(); ++d)
      EXPECT_EQ(qrels.grade(w.query_ids[q], w.doc_ids[d]), w.grade(q, d));
}

TEST(World, InvalidConfigRejected) {
  auto c = small();
  c.teacher_temp = 0;
  EXPECT_THROW(synth::generate(c), Error);
  c = small();
  c.max_doc_len = 10;
  EXPECT_THROW(c.validate(), Error);
  c = small();
  c.topic_word_rate = 1.5;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Oracle, MatchesBruteForceAndScoresPerfectly) {
  const auto w = synth::generate(small());
  const auto qrels = w.qrels();
  for (std::size_t q = 0; q < w.query_ids.size(); ++q) {
    std::vector<std::size_t> idx(w.doc_ids.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (w.grade(q, a) != w.grade(q, b)) return w.grade(q, a) > w.grade(q, b);
      if (w.sim[q][a] != w.sim[q][b]) return w.sim[q][a] > w.sim[q][b];
      return w.doc_ids[a] < w.doc_ids[b];
    });
    const auto run = synth::oracle_ranking(w, q, 25);
    ASSERT_EQ(run.size(), 25u);
    for (std::size_t r = 0; r < 25; ++r) EXPECT_EQ(run[r].doc, w.doc_ids[idx[r]]);
    if (w.grade(q, idx[0]) > 0) {
      EXPECT_NEAR(ndcg_at_k(run, qrels, 10), 1.0, 1e-12);
    }
  }
}

TEST(Split, DisjointSizedAndOrderIndependent) {
  std::vector<QueryId> ids;
  for (int i = 0; i < 50; ++i) ids.emplace_back("q" + std::to_string(i));
  const auto [train, test] = synth::split_queries(ids, 0.2, 3);
  EXPECT_EQ(test.size(), 10u);
  EXPECT_EQ(train.size(), 40u);
  std::set<QueryId> all(train.begin(), train.end());
  all.insert(test.begin(), test.end());
  EXPECT_EQ(all.size(), 50u);
  auto reversed = ids;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(synth::split_queries(reversed, 0.2, 3).second, test);
  EXPECT_NE(synth::split_queries(ids, 0.2, 4).second, test);
  EXPECT_THROW(synth::split_queries(ids, 1.0, 3), Error);
}
