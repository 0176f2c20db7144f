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
#include <cstdlib>
#include <filesystem>
#include <set>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "rankdistill/pipeline.hpp"

using namespace rankdistill;
namespace pl = rankdistill::pipeline;
namespace fs = std::filesystem;

namespace {

pl::RunConfig small_config() {
  Config c;
  c.set("world.n_docs=150");
  c.set("world.n_queries=30");
  c.set("mine.sampler=random");
  c.set("train.steps=50");
  return pl::resolve(c);
}

struct Fixture {
  explicit Fixture(pl::RunConfig c = small_config()) : cfg(std::move(c)) {}
  pl::RunConfig cfg;
  synth::SyntheticWorld world = synth::generate(cfg.world);
  pl::WorldInputs in = pl::from_world(world);
  lexical::InvertedIndex index = lexical::InvertedIndex::build(in.corpus);
};

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("rankdistill_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + RANKDISTILL_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Mine, RandomGroupsHaveSixteenCandidates) {
  Fixture f;
  f.cfg.sampler.kind = SamplerKind::random;
  const auto groups = pl::mine(f.cfg, f.in, f.index);
  ASSERT_FALSE(groups.empty());
  for (const auto& g : groups) {
    EXPECT_EQ(g.doc_ids.size(), 16u);
    EXPECT_EQ(*g.positive_index, 0u);
    EXPECT_GE(f.in.qrels.grade(g.query_id, g.doc_ids[0]), 1);
  }
}

TEST(Mine, EnsembleNegativesComeFromConstituentPools) {
  Fixture f(pl::RunConfig{});
  f.cfg.sampler.kind = SamplerKind::ensemble;
  f.cfg.sampler.pool_depth = 40;
  f.cfg.sampler.ensemble_depth = 60;
  const synth::Teacher teacher(f.cfg.world, f.in.embeddings);
  const auto docs = pl::doc_ids(f.in);
  const CorpusHandles h{&f.index, teacher, &docs, &f.in.embeddings, f.cfg.bm25};
  std::map<QueryId, std::string> text(f.in.queries.begin(), f.in.queries.end());
  for (const auto& g : pl::mine(f.cfg, f.in, f.index)) {
    std::set<DocId> pool;
    for (auto c : f.cfg.sampler.constituents)
      for (const auto& d :
           detail::constituent_pool(c, Query{g.query_id, text.at(g.query_id)}, g.doc_ids[0], h, f.cfg.sampler))
        pool.insert(d);
    for (std::size_t i = 1; i < g.doc_ids.size(); ++i) EXPECT_TRUE(pool.count(g.doc_ids[i])) << g.doc_ids[i].str();
  }
}

TEST(Mine, DeterministicAndThreadIndependent) {
  Fixture f;
  const auto a = format_groups(pl::mine(f.cfg, f.in, f.index, 1));
  EXPECT_EQ(a, format_groups(pl::mine(f.cfg, f.in, f.index, 1)));
  EXPECT_EQ(a, format_groups(pl::mine(f.cfg, f.in, f.index, 3)));
}

TEST(Mine, OnlyTrainingQueries) {
  Fixture f;
  const auto test = pl::split_side(f.cfg, f.in, true);
  std::set<QueryId> held;
  for (const auto& [q, _] : test) held.insert(q);
  EXPECT_EQ(test.size(), 6u);
  for (const auto& g : pl::mine(f.cfg, f.in, f.index)) EXPECT_FALSE(held.count(g.query_id));
}

TEST(Positive, HighestGradeThenSimilarityThenId) {
  pl::WorldInputs in;
  in.embeddings = EmbeddingTable(2);
  in.embeddings.insert("q", {1, 0});
  in.embeddings.insert("a", {0.6, 0.8});
  in.embeddings.insert("b", {0.8, 0.6});
  in.embeddings.insert("c", {0.8, 0.6});
  in.embeddings.insert("z", {1, 0});
  in.embeddings.insert("other", {0, 1});
  const QueryId q("q");
  in.qrels.set(q, DocId("z"), 1);
  in.qrels.set(q, DocId("a"), 2);
  EXPECT_EQ(pl::choose_positive(q, in)->str(), "a");
  in.qrels.set(q, DocId("c"), 2);
  EXPECT_EQ(pl::choose_positive(q, in)->str(), "c");
  in.qrels.set(q, DocId("b"), 2);
  EXPECT_EQ(pl::choose_positive(q, in)->str(), "b");
  EXPECT_FALSE(pl::choose_positive(QueryId("other"), in).has_value());
}

TEST(Label, IdempotentAndMatchesTeacher) {
  Fixture f;
  const auto groups = pl::mine(f.cfg, f.in, f.index);
  const auto once = pl::label(f.cfg, groups, f.in.embeddings);
  EXPECT_EQ(format_groups(once), format_groups(pl::label(f.cfg, once, f.in.embeddings)));
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto& g = once[uniform_index(rng, once.size())];
    ASSERT_EQ(g.teacher_scores->size(), g.doc_ids.size());
    const std::size_t i = uniform_index(rng, g.doc_ids.size());
    const auto q = f.world.query_index(g.query_id);
    const auto d = static_cast<std::size_t>(std::stoi(g.doc_ids[i].str().substr(1)));
    EXPECT_NEAR((*g.teacher_scores)[i], f.world.teacher(q, d), 1e-9);
  }
}

TEST(Select, InnerAndOutlierPartition) {
  Fixture f;
  const auto groups = pl::label(f.cfg, pl::mine(f.cfg, f.in, f.index), f.in.embeddings);
  auto cfg = f.cfg;
  cfg.band = QuartileBand::inner;
  const auto inner = pl::select(cfg, groups);
  cfg.band = QuartileBand::outlier;
  const auto outlier = pl::select(cfg, groups);
  std::set<QueryId> a, b;
  for (const auto& g : inner) a.insert(g.query_id);
  for (const auto& g : outlier) b.insert(g.query_id);
  for (const auto& q : a) EXPECT_FALSE(b.count(q));
  EXPECT_EQ(a.size() + b.size(), groups.size());
  cfg.band.reset();
  EXPECT_EQ(pl::select(cfg, groups).size(), groups.size());
}

TEST(Train, IncompatibleTargetsRejectedUpFront) {
  Fixture f;
  const auto unlabeled = pl::mine(f.cfg, f.in, f.index);
  try {
    pl::train_student(f.cfg, unlabeled, f.in.embeddings);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  auto cfg = f.cfg;
  cfg.train.loss = LossKind::lce;
  EXPECT_NO_THROW(pl::train_student(cfg, unlabeled, f.in.embeddings));
}

TEST(Evaluate, OracleRunScoresOne) {
  Fixture f;
  RunMap run;
  for (std::size_t q = 0; q < f.world.query_ids.size(); ++q) {
    bool any = false;
    for (std::size_t d = 0; d < f.world.doc_ids.size(); ++d) any = any || f.world.grade(q, d) > 0;
    if (any) run.emplace(f.world.query_ids[q], synth::oracle_ranking(f.world, q, 100));
  }
  const auto metrics = pl::evaluate_run(f.cfg, run, f.in.qrels);
  EXPECT_NEAR(metrics[0].mean, 1.0, 1e-12);
  EXPECT_NEAR(metrics[1].mean, 1.0, 1e-12);
}

TEST(Score, RanksTestQueriesToDepth) {
  Fixture f;
  const auto model = StudentScorer::init(StudentKind::biencoder, f.cfg.world.embed_dim, 4, 1);
  const auto run = pl::score(f.cfg, model, f.in, 2);
  EXPECT_EQ(run.size(), pl::split_side(f.cfg, f.in, true).size());
  for (const auto& [q, list] : run) EXPECT_EQ(list.size(), f.cfg.eval.depth);
  EXPECT_EQ(format_run(run, "t"), format_run(pl::score(f.cfg, model, f.in, 1), "t"));
}

TEST(Tost, MatrixCoversPairs) {
  const pl::RunConfig cfg;
  MetricResult a, b, c;
  for (int i = 0; i < 5; ++i) {
    const QueryId q("q" + std::to_string(i));
    a.per_query[q] = 0.5 + 0.01 * i;
    b.per_query[q] = 0.5 + 0.01 * i + 0.001 * (i % 2);
    c.per_query[q] = 0.9;
  }
  const auto rows = pl::tost_matrix(cfg, {{"a", a}, {"b", b}, {"c", c}});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[0].result.equivalent);
  EXPECT_FALSE(rows[1].result.equivalent);
  MetricResult d;
  d.per_query[QueryId("other")] = 1;
  EXPECT_THROW(pl::tost_matrix(cfg, {{"a", a}, {"d", d}}), Error);
}

TEST(Manifest, RoundTripAndRelativePaths) {
  const auto dir = scratch("manifest");
  fs::create_directories(dir / "sub");
  write_text_file((dir / "in.txt").string(), "hello");
  write_text_file((dir / "sub" / "out.txt").string(), "world");
  pl::write_manifest(dir.string(), "stage", pl::RunConfig{}, {(dir / "in.txt").string()},
                     {(dir / "sub" / "out.txt").string()});
  const auto m = pl::parse_manifest((dir / "stage.manifest.json").string());
  EXPECT_EQ(m.stage, "stage");
  EXPECT_EQ(m.inputs.at("in.txt"), pl::sha256_hex("hello"));
  EXPECT_EQ(m.outputs.at("sub/out.txt"), pl::sha256_hex("world"));
  EXPECT_NO_THROW(pl::check_manifests(dir.string(), pl::read_manifests(dir.string())));
  write_text_file((dir / "in.txt").string(), "changed");
  EXPECT_THROW(pl::check_manifests(dir.string(), pl::read_manifests(dir.string())), Error);
  fs::remove_all(dir);
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(pl::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Cli, SynthGenDeterministicAndExitCodes) {
  const auto a = scratch("cli_a"), b = scratch("cli_b");
  const std::string set = " --set world.n_docs=80 --set world.n_queries=10";
  ASSERT_EQ(cli("--dir " + a.string() + set + " synth-gen"), 0);
  ASSERT_EQ(cli("--dir " + b.string() + set + " synth-gen"), 0);
  for (const char* f : {"corpus.tsv", "embeddings.tsv", "qrels.tsv", "queries.tsv", "synth-gen.manifest.json"})
    EXPECT_EQ(read_file((a / f).string()), read_file((b / f).string())) << f;
  EXPECT_EQ(cli("--dir " + a.string() + " --set world.n_docs=0 synth-gen"), 2);
  EXPECT_EQ(cli("--dir " + a.string() + " --set no.such=1 synth-gen"), 2);
  EXPECT_EQ(cli("--dir " + a.string() + " train"), 1);  // missing inputs
  EXPECT_EQ(cli("--dir " + a.string() + " report"), 0);
  EXPECT_EQ(cli("--help"), 0);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, ReportRefusesMixedWorlds) {
  const auto d = scratch("cli_mixed");
  const std::string base = "--dir " + d.string() + " --set world.n_docs=80 --set world.n_queries=10";
  ASSERT_EQ(cli(base + " synth-gen"), 0);
  ASSERT_EQ(cli(base + " index"), 0);
  ASSERT_EQ(cli(base + " --set world.seed=99 mine"), 0);
  EXPECT_EQ(cli("--dir " + d.string() + " report"), 2);
  fs::remove_all(d);
}

TEST(Cli, UnlabeledGroupsWithTeacherLossExitTwo) {
  const auto d = scratch("cli_loss");
  const std::string base = "--dir " + d.string() + " --set world.n_docs=80 --set world.n_queries=10";
  ASSERT_EQ(cli(base + " synth-gen"), 0);
  ASSERT_EQ(cli(base + " index"), 0);
  ASSERT_EQ(cli(base + " mine"), 0);
  EXPECT_EQ(cli(base + " train --groups " + (d / "groups.jsonl").string()), 2);
  EXPECT_FALSE(fs::exists(d / "model.bin"));
  fs::remove_all(d);
}
