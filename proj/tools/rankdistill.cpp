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
// rankdistill: command-line driver for the distillation pipeline.
//
//   rankdistill [--config FILE] [--set key=value]... [--dir DIR] [--threads N] <command>
//
// Every command reads its inputs from DIR (default ".") unless a path flag
// overrides them, writes its outputs into DIR, and leaves a
// <command>.manifest.json next to them.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rankdistill/config.hpp"
#include "rankdistill/pipeline.hpp"

namespace fs = std::filesystem;
using namespace rankdistill;
namespace pl = rankdistill::pipeline;

namespace {

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string dir = ".";
  unsigned threads = 1;
};

// Input paths; empty means "the default file in the run directory".
struct Paths {
  std::string corpus, queries, embeddings, qrels, index, groups, model, run;
};

std::string in_dir(const Globals& g, const char* name) { return (fs::path(g.dir) / name).string(); }

std::string pick(const Globals& g, const std::string& given, const char* fallback) {
  return given.empty() ? in_dir(g, fallback) : given;
}

pl::RunConfig load_config(const Globals& g) {
  Config c = g.config_path.empty() ? Config{} : Config::load(g.config_path);
  for (const auto& o : g.overrides) c.set(o);
  return pl::resolve(c);
}

void prepare_dir(const Globals& g) {
  std::error_code ec;
  fs::create_directories(g.dir, ec);
  require(!ec && fs::is_directory(g.dir), ErrorKind::io, "cannot create directory " + g.dir);
}

void synth_gen(const Globals& g) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto files = synth::format_world(synth::generate(cfg.world));
  const std::vector<std::pair<const char*, const std::string*>> out{{pl::files::corpus, &files.corpus},
                                                                   {pl::files::embeddings, &files.embeddings},
                                                                   {pl::files::qrels, &files.qrels},
                                                                   {pl::files::queries, &files.queries}};
  std::vector<std::string> written;
  for (const auto& [name, text] : out) {
    write_text_file(in_dir(g, name), *text);
    written.push_back(in_dir(g, name));
  }
  pl::write_manifest(g.dir, "synth-gen", cfg, {}, written);
}

void index_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto corpus = pick(g, p.corpus, pl::files::corpus);
  std::vector<std::pair<DocId, std::string>> docs;
  for (auto& [id, text] : parse_text_table(corpus)) docs.emplace_back(DocId(id), std::move(text));
  const auto out = in_dir(g, pl::files::index);
  write_text_file(out, lexical::InvertedIndex::build(docs).snapshot());
  pl::write_manifest(g.dir, "index", cfg, {corpus}, {out});
}

void mine_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const std::vector<std::string> inputs{pick(g, p.corpus, pl::files::corpus), pick(g, p.queries, pl::files::queries),
                                        pick(g, p.embeddings, pl::files::embeddings),
                                        pick(g, p.qrels, pl::files::qrels), pick(g, p.index, pl::files::index)};
  const auto world = pl::load_world(inputs[0], inputs[1], inputs[2], inputs[3]);
  const auto index = lexical::InvertedIndex::from_snapshot(read_file(inputs[4]));
  const auto out = in_dir(g, pl::files::groups);
  write_groups_jsonl(pl::mine(cfg, world, index, g.threads), out);
  pl::write_manifest(g.dir, "mine", cfg, inputs, {out});
}

void label_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto groups = pick(g, p.groups, pl::files::groups);
  const auto emb = pick(g, p.embeddings, pl::files::embeddings);
  const auto out = in_dir(g, pl::files::labeled);
  write_groups_jsonl(pl::label(cfg, parse_groups_jsonl(groups), parse_embeddings(emb), g.threads), out);
  pl::write_manifest(g.dir, "label", cfg, {groups, emb}, {out});
}

void select_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto groups = pick(g, p.groups, pl::files::labeled);
  const auto out = in_dir(g, pl::files::selected);
  write_groups_jsonl(pl::select(cfg, parse_groups_jsonl(groups)), out);
  pl::write_manifest(g.dir, "select", cfg, {groups}, {out});
}

void diagnose_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto groups = pick(g, p.groups, pl::files::labeled);
  const auto emb = pick(g, p.embeddings, pl::files::embeddings);
  const auto rep = pl::diagnose(cfg, parse_groups_jsonl(groups), parse_embeddings(emb), g.threads);
  const auto out = in_dir(g, pl::files::diagnostics);
  write_text_file(out, format_report_tsv(rep));
  std::cout << format_report_table(rep);
  pl::write_manifest(g.dir, "diagnose", cfg, {groups, emb}, {out});
}

void train_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto groups = pick(g, p.groups, pl::files::selected);
  const auto emb = pick(g, p.embeddings, pl::files::embeddings);
  const auto result = pl::train_student(cfg, parse_groups_jsonl(groups), parse_embeddings(emb));
  const auto model = in_dir(g, pl::files::model), loss = in_dir(g, pl::files::loss);
  save_checkpoint(result.model, model);
  write_text_file(loss, format_loss_trace(result.loss_trace));
  pl::write_manifest(g.dir, "train", cfg, {groups, emb}, {model, loss});
}

void score_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto model = pick(g, p.model, pl::files::model);
  const std::vector<std::string> world_in{pick(g, p.corpus, pl::files::corpus), pick(g, p.queries, pl::files::queries),
                                          pick(g, p.embeddings, pl::files::embeddings)};
  pl::WorldInputs world;
  for (auto& [id, text] : parse_text_table(world_in[0])) world.corpus.emplace_back(DocId(id), std::move(text));
  for (auto& [id, text] : parse_text_table(world_in[1])) world.queries.emplace_back(QueryId(id), std::move(text));
  world.embeddings = parse_embeddings(world_in[2]);
  const auto out = in_dir(g, pl::files::run);
  write_run_file(pl::score(cfg, load_checkpoint(model), world, g.threads), "rankdistill", out);
  auto inputs = world_in;
  inputs.push_back(model);
  pl::write_manifest(g.dir, "score", cfg, inputs, {out});
}

void evaluate_cmd(const Globals& g, const Paths& p) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  const auto run = pick(g, p.run, pl::files::run);
  const auto qrels = pick(g, p.qrels, pl::files::qrels);
  const auto results = pl::evaluate_run(cfg, parse_run_file(run), parse_qrels(qrels));
  const auto out = in_dir(g, pl::files::metrics);
  write_text_file(out, format_metrics(results));
  for (const auto& r : results) std::cout << r.metric << "\tall\t" << format_score(r.mean) << '\n';
  pl::write_manifest(g.dir, "evaluate", cfg, {run, qrels}, {out});
}

void tost_cmd(const Globals& g, const std::vector<std::string>& metric_files) {
  const auto cfg = load_config(g);
  prepare_dir(g);
  std::vector<std::pair<std::string, MetricResult>> runs;
  std::optional<std::string> world;
  for (const auto& f : metric_files) {
    // Refuse to compare metrics from different worlds when provenance exists.
    const auto manifest = fs::path(f).parent_path() / pl::manifest_name("evaluate");
    if (fs::exists(manifest)) {
      const auto w = pl::parse_manifest(manifest.string()).world;
      require(!world || *world == w, ErrorKind::validation, f + " was evaluated on a different world");
      world = w;
    }
    runs.emplace_back(pl::relative_to(g.dir, f), parse_metric(read_file(f), cfg.eval.tost_metric, f));
  }
  const auto rows = pl::tost_matrix(cfg, runs);
  const auto out = in_dir(g, pl::files::tost);
  const auto text = pl::format_tost(cfg.eval.tost_metric, rows);
  write_text_file(out, text);
  std::cout << text;
  pl::write_manifest(g.dir, "tost", cfg, metric_files, {out});
}

void report_cmd(const Globals& g) {
  const auto rows = pl::build_report(g.dir);
  write_text_file(in_dir(g, pl::files::report), pl::format_report_rows(rows));
  std::cout << pl::format_report_pretty(rows);
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse:
    case ErrorKind::validation:
    case ErrorKind::config: return 2;
    case ErrorKind::io:
    case ErrorKind::runtime: return 1;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ranking distillation laboratory: synthetic worlds, negative mining, diagnostics, training, evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  Paths p;
  app.add_option("-c,--config", g.config_path, "key=value run configuration")->check(CLI::ExistingFile);
  app.add_option("-s,--set", g.overrides, "override one setting, e.g. --set world.seed=3")->take_all();
  app.add_option("-d,--dir", g.dir, "run directory for inputs and outputs")->capture_default_str();
  app.add_option("-j,--threads", g.threads, "worker threads for per-query stages")->capture_default_str()
      ->check(CLI::Range(1u, 256u));

  auto add = [&](const char* name, const char* help) { return app.add_subcommand(name, help); };
  auto* c_synth = add("synth-gen", "generate corpus, embeddings, qrels and queries");
  auto* c_index = add("index", "build the BM25 index snapshot");
  c_index->add_option("--corpus", p.corpus, "corpus TSV");
  auto* c_mine = add("mine", "mine training groups for the training queries");
  c_mine->add_option("--corpus", p.corpus, "corpus TSV");
  c_mine->add_option("--queries", p.queries, "queries TSV");
  c_mine->add_option("--embeddings", p.embeddings, "embeddings TSV");
  c_mine->add_option("--qrels", p.qrels, "qrels file");
  c_mine->add_option("--index", p.index, "index snapshot");
  auto* c_label = add("label", "attach teacher scores to groups");
  c_label->add_option("--groups", p.groups, "groups JSONL (default groups.jsonl)");
  c_label->add_option("--embeddings", p.embeddings, "embeddings TSV");
  auto* c_select = add("select", "keep groups in an entropy quartile band");
  c_select->add_option("--groups", p.groups, "groups JSONL (default labeled.jsonl)");
  auto* c_diag = add("diagnose", "entropy, diameter and density-ratio report");
  c_diag->add_option("--groups", p.groups, "groups JSONL (default labeled.jsonl)");
  c_diag->add_option("--embeddings", p.embeddings, "embeddings TSV");
  auto* c_train = add("train", "train a student on selected groups");
  c_train->add_option("--groups", p.groups, "groups JSONL (default selected.jsonl)");
  c_train->add_option("--embeddings", p.embeddings, "embeddings TSV");
  auto* c_score = add("score", "rank the corpus for the test queries");
  c_score->add_option("--model", p.model, "checkpoint (default model.bin)");
  c_score->add_option("--corpus", p.corpus, "corpus TSV");
  c_score->add_option("--queries", p.queries, "queries TSV");
  c_score->add_option("--embeddings", p.embeddings, "embeddings TSV");
  auto* c_eval = add("evaluate", "nDCG@k and MAP of a run");
  c_eval->add_option("--run", p.run, "run file (default run.txt)");
  c_eval->add_option("--qrels", p.qrels, "qrels file");
  std::vector<std::string> tost_inputs;
  auto* c_tost = add("tost", "pairwise equivalence tests between metric files");
  c_tost->add_option("metrics", tost_inputs, "two or more metrics TSVs")->required()->expected(2, -1)
      ->check(CLI::ExistingFile);
  auto* c_report = add("report", "summarise a run directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_synth->parsed()) synth_gen(g);
    else if (c_index->parsed()) index_cmd(g, p);
    else if (c_mine->parsed()) mine_cmd(g, p);
    else if (c_label->parsed()) label_cmd(g, p);
    else if (c_select->parsed()) select_cmd(g, p);
    else if (c_diag->parsed()) diagnose_cmd(g, p);
    else if (c_train->parsed()) train_cmd(g, p);
    else if (c_score->parsed()) score_cmd(g, p);
    else if (c_eval->parsed()) evaluate_cmd(g, p);
    else if (c_tost->parsed()) tost_cmd(g, tost_inputs);
    else if (c_report->parsed()) report_cmd(g);
  } catch (const Error& e) {
    std::cerr << "rankdistill: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "rankdistill: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
