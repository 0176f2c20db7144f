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
#pragma once

// End-to-end stages over the file formats of the other modules. Each stage
// is a pure function of its inputs and the run configuration; the file-level
// wrappers add a JSON manifest with input and output checksums.

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <concepts>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rankdistill/config.hpp"
#include "rankdistill/core.hpp"
#include "rankdistill/diagnostics.hpp"
#include "rankdistill/eval.hpp"
#include "rankdistill/io.hpp"
#include "rankdistill/lexical.hpp"
#include "rankdistill/losses.hpp"
#include "rankdistill/selection.hpp"
#include "rankdistill/student.hpp"
#include "rankdistill/synth.hpp"

namespace rankdistill::pipeline {

// ---------------------------------------------------------------------------
// Configuration

struct EvalSpec {
  std::size_t k = 10;
  std::size_t depth = 100;  // run depth written by the score stage
  std::string tost_metric = "ndcg_cut_10";
  double alpha = 0.05;
  double epsilon = 0.05;
};

struct RunConfig {
  synth::WorldConfig world;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 7;
  lexical::Bm25Params bm25;
  SamplerSpec sampler;
  std::optional<QuartileBand> band = QuartileBand::inner;  // nullopt keeps every group
  double select_tau = 1.0;
  DiagnosticsConfig diagnostics;
  StudentKind student = StudentKind::biencoder;
  std::size_t hidden = 16;
  TrainConfig train;
  EvalSpec eval;

  void validate() const {
    world.validate();
    require(test_fraction > 0 && test_fraction < 1, ErrorKind::config, "split.test_fraction must be in (0, 1)");
    bm25.validate();
    sampler.validate();
    require(select_tau > 0, ErrorKind::config, "select.tau must be > 0");
    require(diagnostics.tau > 0, ErrorKind::config, "diagnose.tau must be > 0");
    require(diagnostics.sample_pairs >= 1, ErrorKind::config, "diagnose.sample_pairs must be >= 1");
    require(hidden >= 1, ErrorKind::config, "student.hidden must be >= 1");
    train.validate();
    require(eval.k >= 1 && eval.depth >= eval.k, ErrorKind::config, "eval.depth must be >= eval.k >= 1");
    require(eval.alpha > 0 && eval.alpha < 1 && eval.epsilon >= 0, ErrorKind::config,
            "eval.alpha must be in (0, 1) and eval.epsilon >= 0");
  }
};

namespace detail {

inline std::string band_name(const std::optional<QuartileBand>& b) { return b ? to_string(*b) : "all"; }

inline std::string mode_name(DiameterMode m) { return m == DiameterMode::max ? "max" : "percentile95"; }

inline std::string join(const std::vector<SamplerKind>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return s;
}

// Reads every key (falling back to the current value) so that a single
// table drives parsing, the canonical dump, and unknown-key detection.
struct Reader {
  const Config& c;
  template <std::unsigned_integral T>
  void operator()(const std::string& k, T& v) const {
    v = static_cast<T>(c.get_uint(k, v));
  }
  void operator()(const std::string& k, double& v) const { v = c.get_double(k, v); }
  void operator()(const std::string& k, bool& v) const { v = c.get_bool(k, v); }
  void operator()(const std::string& k, std::string& v) const { v = c.get(k, v); }
  void operator()(const std::string& k, SamplerKind& v) const { v = parse_sampler_kind(c.get(k, to_string(v))); }
  void operator()(const std::string& k, LossKind& v) const { v = parse_loss_kind(c.get(k, to_string(v))); }
  void operator()(const std::string& k, StudentKind& v) const { v = parse_student_kind(c.get(k, to_string(v))); }
  void operator()(const std::string& k, DiameterMode& v) const { v = parse_diameter_mode(c.get(k, mode_name(v))); }
  void operator()(const std::string& k, FilterDistance& v) const {
    const auto s = c.get(k, v == FilterDistance::teacher_score ? "teacher" : "embedding");
    if (s == "teacher") v = FilterDistance::teacher_score;
    else if (s == "embedding") v = FilterDistance::embedding;
    else fail(ErrorKind::config, k + ": expected teacher or embedding, got '" + s + "'");
  }
  void operator()(const std::string& k, std::optional<QuartileBand>& v) const {
    const auto s = c.get(k, band_name(v));
    v = s == "all" ? std::nullopt : std::optional(parse_band(s));
  }
  void operator()(const std::string& k, std::vector<SamplerKind>& v) const {
    std::vector<SamplerKind> out;
    for (const auto& s : c.get_list(k, {})) out.push_back(parse_sampler_kind(s));
    if (c.has(k)) v = out;
  }
};

struct Writer {
  std::string out;
  void put(const std::string& k, const std::string& v) { out += k + "=" + v + "\n"; }
  template <std::unsigned_integral T>
  void operator()(const std::string& k, T v) {
    put(k, std::to_string(v));
  }
  void operator()(const std::string& k, double v) { put(k, format_exact(v)); }
  void operator()(const std::string& k, bool v) { put(k, v ? "true" : "false"); }
  void operator()(const std::string& k, const std::string& v) { put(k, v); }
  void operator()(const std::string& k, SamplerKind v) { put(k, to_string(v)); }
  void operator()(const std::string& k, LossKind v) { put(k, to_string(v)); }
  void operator()(const std::string& k, StudentKind v) { put(k, to_string(v)); }
  void operator()(const std::string& k, DiameterMode v) { put(k, mode_name(v)); }
  void operator()(const std::string& k, FilterDistance v) {
    put(k, v == FilterDistance::teacher_score ? "teacher" : "embedding");
  }
  void operator()(const std::string& k, const std::optional<QuartileBand>& v) { put(k, band_name(v)); }
  void operator()(const std::string& k, const std::vector<SamplerKind>& v) { put(k, join(v)); }
};

template <class R, class V>
void visit_world(R& w, V&& v) {
  v("world.n_topics", w.n_topics);
  v("world.n_subtopics", w.n_subtopics);
  v("world.n_docs", w.n_docs);
  v("world.n_queries", w.n_queries);
  v("world.vocab_size", w.vocab_size);
  v("world.embed_dim", w.embed_dim);
  v("world.subtopic_spread", w.subtopic_spread);
  v("world.doc_noise", w.doc_noise);
  v("world.teacher_noise", w.teacher_noise);
  v("world.teacher_temp", w.teacher_temp);
  v("world.teacher_scale", w.teacher_scale);
  v("world.topic_word_rate", w.topic_word_rate);
  v("world.min_doc_len", w.min_doc_len);
  v("world.max_doc_len", w.max_doc_len);
  v("world.query_len", w.query_len);
  v("world.seed", w.seed);
}

template <class R, class V>
void visit(R& r, V&& v) {
  visit_world(r.world, v);
  v("split.test_fraction", r.test_fraction);
  v("split.seed", r.split_seed);
  v("bm25.k1", r.bm25.k1);
  v("bm25.b", r.bm25.b);
  v("mine.sampler", r.sampler.kind);
  v("mine.k", r.sampler.k);
  v("mine.pool_depth", r.sampler.pool_depth);
  v("mine.seed", r.sampler.seed);
  v("mine.ensemble_depth", r.sampler.ensemble_depth);
  v("mine.constituents", r.sampler.constituents);
  v("mine.epsilon", r.sampler.epsilon);
  v("mine.distance", r.sampler.distance);
  v("select.band", r.band);
  v("select.tau", r.select_tau);
  v("diagnose.tau", r.diagnostics.tau);
  v("diagnose.diameter", r.diagnostics.mode);
  v("diagnose.sample_pairs", r.diagnostics.sample_pairs);
  v("diagnose.seed", r.diagnostics.seed);
  v("diagnose.include_positive", r.diagnostics.include_positive);
  v("student.kind", r.student);
  v("student.hidden", r.hidden);
  v("train.loss", r.train.loss);
  v("train.steps", r.train.steps);
  v("train.group_size", r.train.group_size);
  v("train.peak_lr", r.train.peak_lr);
  v("train.warmup_frac", r.train.warmup_frac);
  v("train.weight_decay", r.train.weight_decay);
  v("train.tau", r.train.tau);
  v("train.seed", r.train.seed);
  v("eval.k", r.eval.k);
  v("eval.depth", r.eval.depth);
  v("eval.tost_metric", r.eval.tost_metric);
  v("eval.alpha", r.eval.alpha);
  v("eval.epsilon", r.eval.epsilon);
}

}  // namespace detail

/// Resolves a parsed config into a RunConfig; unknown keys are an error.
inline RunConfig resolve(const Config& c) {
  RunConfig r;
  detail::visit(r, detail::Reader{c});
  c.reject_unknown();
  r.validate();
  return r;
}

/// Every setting as key=value lines in a fixed order.
inline std::string canonical(const RunConfig& r) {
  detail::Writer w;
  detail::visit(r, w);
  return w.out;
}

inline std::string canonical_world(const synth::WorldConfig& c) {
  detail::Writer w;
  detail::visit_world(c, w);
  return w.out;
}

// ---------------------------------------------------------------------------
// Checksums and manifests

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  require(EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) == 1, ErrorKind::runtime,
          "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string file_sha256(const std::string& path) { return sha256_hex(read_file(path)); }

inline std::string world_hash(const synth::WorldConfig& c) { return sha256_hex(canonical_world(c)); }

struct Manifest {
  std::string stage;
  std::string world;   // hash of the world settings
  std::string config;  // hash of the full resolved configuration
  std::map<std::string, std::string> inputs, outputs;  // path relative to the run dir -> sha256
};

inline std::string manifest_name(const std::string& stage) { return stage + ".manifest.json"; }

inline std::string format_manifest(const Manifest& m) {
  nlohmann::ordered_json j;
  j["stage"] = m.stage;
  j["world"] = m.world;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

inline Manifest parse_manifest(const std::string& path) {
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    Manifest m;
    m.stage = j.at("stage").get<std::string>();
    m.world = j.at("world").get<std::string>();
    m.config = j.at("config").get<std::string>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, path + ": bad manifest: " + e.what());
  }
}

/// `path` relative to the run directory, so manifests and labels do not
/// depend on where the directory lives.
inline std::string relative_to(const std::string& dir, const std::string& path) {
  namespace fs = std::filesystem;
  const auto rel = fs::absolute(path).lexically_normal().lexically_relative(fs::absolute(dir).lexically_normal());
  return rel.empty() ? fs::path(path).filename().string() : rel.generic_string();
}

/// Writes the manifest of a finished stage into `dir`.
inline void write_manifest(const std::string& dir, const std::string& stage, const RunConfig& cfg,
                           const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
  Manifest m;
  m.stage = stage;
  m.world = world_hash(cfg.world);
  m.config = sha256_hex(canonical(cfg));
  for (const auto& p : inputs) m.inputs[relative_to(dir, p)] = file_sha256(p);
  for (const auto& p : outputs) m.outputs[relative_to(dir, p)] = file_sha256(p);
  write_text_file((std::filesystem::path(dir) / manifest_name(stage)).string(), format_manifest(m));
}

/// Manifests found in `dir`, keyed by stage.
inline std::map<std::string, Manifest> read_manifests(const std::string& dir) {
  std::map<std::string, Manifest> out;
  require(std::filesystem::is_directory(dir), ErrorKind::io, "not a directory: " + dir);
  std::vector<std::filesystem::path> paths;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() > 14 && name.compare(name.size() - 14, 14, ".manifest.json") == 0) paths.push_back(e.path());
  }
  std::sort(paths.begin(), paths.end());
  for (const auto& p : paths) {
    auto m = parse_manifest(p.string());
    out[m.stage] = std::move(m);
  }
  return out;
}

/// Refuses manifests from different worlds and files changed since the
/// stage that produced or consumed them.
inline void check_manifests(const std::string& dir, const std::map<std::string, Manifest>& manifests) {
  require(!manifests.empty(), ErrorKind::validation, dir + ": no stage manifests");
  const auto& first = manifests.begin()->second;
  for (const auto& [stage, m] : manifests)
    require(m.world == first.world, ErrorKind::validation,
            "stage '" + stage + "' ran on a different world than stage '" + first.stage + "'");
  for (const auto& [stage, m] : manifests) {
    for (const auto* files : {&m.inputs, &m.outputs})
      for (const auto& [name, sum] : *files) {
        const auto p = std::filesystem::path(dir) / name;
        if (!std::filesystem::exists(p)) continue;
        require(file_sha256(p.string()) == sum, ErrorKind::validation,
                "'" + name + "' changed after stage '" + stage + "' ran; rerun the stages that depend on it");
      }
  }
}

// ---------------------------------------------------------------------------
// World inputs

struct WorldInputs {
  std::vector<std::pair<DocId, std::string>> corpus;
  std::vector<std::pair<QueryId, std::string>> queries;
  EmbeddingTable embeddings;
  Qrels qrels;
};

inline WorldInputs from_world(const synth::SyntheticWorld& w) {
  WorldInputs in;
  for (std::size_t i = 0; i < w.doc_ids.size(); ++i) in.corpus.emplace_back(w.doc_ids[i], w.doc_text[i]);
  for (std::size_t i = 0; i < w.query_ids.size(); ++i) in.queries.emplace_back(w.query_ids[i], w.query_text[i]);
  in.embeddings = w.embeddings();
  in.qrels = w.qrels();
  return in;
}

inline std::vector<DocId> doc_ids(const WorldInputs& in) {
  std::vector<DocId> out;
  for (const auto& [d, _] : in.corpus) out.push_back(d);
  return out;
}

/// Queries assigned to the train or test side of the split.
inline std::vector<std::pair<QueryId, std::string>> split_side(const RunConfig& cfg, const WorldInputs& in,
                                                               bool test) {
  std::vector<QueryId> ids;
  for (const auto& [q, _] : in.queries) ids.push_back(q);
  const auto [train_ids, test_ids] = synth::split_queries(ids, cfg.test_fraction, cfg.split_seed);
  const auto& side = test ? test_ids : train_ids;
  const std::set<QueryId> keep(side.begin(), side.end());
  std::vector<std::pair<QueryId, std::string>> out;
  for (const auto& q : in.queries)
    if (keep.count(q.first)) out.push_back(q);
  return out;
}

// ---------------------------------------------------------------------------
// Stages

/// The judged document a group is built around: highest grade, then highest
/// embedding similarity to the query, then smallest DocId. Queries with no
/// document of grade >= 1 get no positive.
inline std::optional<DocId> choose_positive(const QueryId& q, const WorldInputs& in) {
  std::optional<DocId> best;
  int best_grade = 0;
  double best_sim = 0.0;
  const auto& qv = in.embeddings.at(q.str());
  for (const auto& [d, g] : in.qrels.judged(q)) {
    if (g < 1) continue;
    const double sim = synth::dot(qv, in.embeddings.at(d.str()));
    if (!best || g > best_grade || (g == best_grade && (sim > best_sim || (sim == best_sim && d < *best)))) {
      best = d;
      best_grade = g;
      best_sim = sim;
    }
  }
  return best;
}

/// One group per query: the positive first, then k mined negatives. Queries
/// without a relevant document are skipped. `index` may be null for the
/// random sampler.
inline std::vector<TrainingGroup> mine_queries(const RunConfig& cfg, const WorldInputs& in,
                                               const lexical::InvertedIndex* index,
                                               const std::vector<std::pair<QueryId, std::string>>& queries,
                                               unsigned threads = 1) {
  const synth::Teacher teacher(cfg.world, in.embeddings);
  const auto docs = doc_ids(in);
  CorpusHandles h{index, teacher, &docs, &in.embeddings, cfg.bm25};
  std::vector<std::optional<TrainingGroup>> slots(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    const auto& [qid, text] = queries[i];
    const auto pos = choose_positive(qid, in);
    if (!pos) return;
    const auto neg = sample_negatives(cfg.sampler, Query{qid, text}, *pos, h);
    TrainingGroup g;
    g.query_id = qid;
    g.doc_ids.push_back(*pos);
    g.doc_ids.insert(g.doc_ids.end(), neg.begin(), neg.end());
    g.positive_index = 0;
    std::vector<int> labels(g.doc_ids.size(), 0);
    labels[0] = 1;
    g.labels = std::move(labels);
    slots[i] = std::move(g);
  });
  std::vector<TrainingGroup> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  require(!out.empty(), ErrorKind::validation, "no query has a relevant document");
  return out;
}

/// Groups for the training side of the split.
inline std::vector<TrainingGroup> mine(const RunConfig& cfg, const WorldInputs& in,
                                       const lexical::InvertedIndex& index, unsigned threads = 1) {
  return mine_queries(cfg, in, &index, split_side(cfg, in, false), threads);
}

/// Attaches (or replaces) teacher scores.
inline std::vector<TrainingGroup> label(const RunConfig& cfg, std::vector<TrainingGroup> groups,
                                        const EmbeddingTable& embeddings, unsigned threads = 1) {
  const synth::Teacher teacher(cfg.world, embeddings);
  parallel_for(groups.size(), threads, [&](std::size_t i) {
    auto& g = groups[i];
    std::vector<double> t;
    t.reserve(g.doc_ids.size());
    for (const auto& d : g.doc_ids) t.push_back(teacher(g.query_id, d));
    g.teacher_scores = std::move(t);
  });
  return groups;
}

inline std::vector<TrainingGroup> select(const RunConfig& cfg, const std::vector<TrainingGroup>& groups) {
  if (!cfg.band) return groups;
  return quartile_filter(groups, *cfg.band, listwise_entropy_fn(cfg.select_tau));
}

inline DiagnosticsReport diagnose(const RunConfig& cfg, const std::vector<TrainingGroup>& groups,
                                  const EmbeddingTable& embeddings, unsigned threads = 1) {
  auto d = cfg.diagnostics;
  d.threads = threads;
  return report(groups, embeddings, d);
}

/// Trains a freshly initialised student. Loss/target mismatches are reported
/// before any computation.
inline TrainResult train_student(const RunConfig& cfg, const std::vector<TrainingGroup>& groups,
                                 const EmbeddingTable& embeddings) {
  require(!groups.empty(), ErrorKind::validation, "no training groups");
  for (const auto& g : groups) check_targets(cfg.train.loss, g);
  const auto model = StudentScorer::init(cfg.student, embeddings.dim(), cfg.hidden, cfg.train.seed);
  return train(model, groups, embeddings, cfg.train);
}

/// Full-corpus ranking for every test query, cut at eval.depth.
inline RunMap score(const RunConfig& cfg, const StudentScorer& model, const WorldInputs& in, unsigned threads = 1) {
  const auto queries = split_side(cfg, in, true);
  std::vector<std::optional<ScoredList>> lists(queries.size());
  parallel_for(queries.size(), threads, [&](std::size_t i) {
    const auto& qid = queries[i].first;
    const auto& qv = in.embeddings.at(qid.str());
    std::vector<ScoredEntry> e;
    e.reserve(in.corpus.size());
    for (const auto& [d, _] : in.corpus) e.push_back({d, model.score(qv, in.embeddings.at(d.str()))});
    lists[i] = ScoredList(qid, std::move(e)).truncated(cfg.eval.depth);
  });
  RunMap run;
  for (auto& l : lists) run.emplace(l->query_id(), std::move(*l));
  return run;
}

inline std::vector<MetricResult> evaluate_run(const RunConfig& cfg, const RunMap& run, const Qrels& qrels) {
  return {evaluate(run, qrels, Metric::ndcg, cfg.eval.k), evaluate(run, qrels, Metric::map)};
}

struct TostRow {
  std::string a, b;
  TostResult result;
};

/// Pairwise TOST over per-query values of one metric; queries must match.
inline std::vector<TostRow> tost_matrix(const RunConfig& cfg,
                                        const std::vector<std::pair<std::string, MetricResult>>& runs) {
  require(runs.size() >= 2, ErrorKind::validation, "tost needs at least two metric files");
  std::vector<TostRow> out;
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      const auto& a = runs[i].second.per_query;
      const auto& b = runs[j].second.per_query;
      require(a.size() == b.size(), ErrorKind::validation,
              "'" + runs[i].first + "' and '" + runs[j].first + "' cover different queries");
      std::vector<double> va, vb;
      for (const auto& [q, v] : a) {
        auto it = b.find(q);
        require(it != b.end(), ErrorKind::validation, "query '" + q.str() + "' missing from '" + runs[j].first + "'");
        va.push_back(v);
        vb.push_back(it->second);
      }
      out.push_back({runs[i].first, runs[j].first, tost(va, vb, cfg.eval.alpha, cfg.eval.epsilon)});
    }
  return out;
}

inline std::string format_tost(const std::string& metric, const std::vector<TostRow>& rows) {
  std::string out = "metric\ta\tb\tmean_a\tmean_b\ttheta\tp_lower\tp_upper\tequivalent\n";
  for (const auto& r : rows)
    out += metric + "\t" + r.a + "\t" + r.b + "\t" + format_score(r.result.mu1) + "\t" + format_score(r.result.mu2) +
           "\t" + format_score(r.result.theta) + "\t" + format_exact(r.result.p_lower) + "\t" +
           format_exact(r.result.p_upper) + "\t" + (r.result.equivalent ? "yes" : "no") + "\n";
  return out;
}

/// Mean power-law exponent and median elbow rank over the queries of a run.
struct RunShape {
  double exponent = 0.0;
  double r2 = 0.0;
  double elbow = 0.0;
  std::size_t queries = 0;
};

inline RunShape run_shape(const RunMap& run) {
  std::vector<double> ex, r2, el;
  for (const auto& [q, list] : run) {
    if (list.size() < 3) continue;
    const auto f = powerlaw_fit(list);
    ex.push_back(f.exponent);
    r2.push_back(f.r2);
    el.push_back(static_cast<double>(f.elbow_rank));
  }
  require(!ex.empty(), ErrorKind::validation, "run has no list long enough for a power-law fit");
  return {mean(ex), mean(r2), percentile(el, 50.0), ex.size()};
}

// ---------------------------------------------------------------------------
// File layout of a run directory

namespace files {
inline constexpr const char* corpus = "corpus.tsv";
inline constexpr const char* embeddings = "embeddings.tsv";
inline constexpr const char* qrels = "qrels.tsv";
inline constexpr const char* queries = "queries.tsv";
inline constexpr const char* index = "index.txt";
inline constexpr const char* groups = "groups.jsonl";
inline constexpr const char* labeled = "labeled.jsonl";
inline constexpr const char* selected = "selected.jsonl";
inline constexpr const char* diagnostics = "diagnostics.tsv";
inline constexpr const char* model = "model.bin";
inline constexpr const char* loss = "loss.tsv";
inline constexpr const char* run = "run.txt";
inline constexpr const char* metrics = "metrics.tsv";
inline constexpr const char* tost = "tost.tsv";
inline constexpr const char* report = "report.tsv";
}  // namespace files

inline WorldInputs load_world(const std::string& corpus, const std::string& queries, const std::string& embeddings,
                              const std::string& qrels) {
  WorldInputs in;
  for (auto& [id, text] : parse_text_table(corpus)) in.corpus.emplace_back(DocId(id), std::move(text));
  for (auto& [id, text] : parse_text_table(queries)) in.queries.emplace_back(QueryId(id), std::move(text));
  in.embeddings = parse_embeddings(embeddings);
  in.qrels = parse_qrels(qrels);
  return in;
}

/// Report table: one "section<TAB>key<TAB>value" row per number.
struct ReportRow {
  std::string section, key, value;
};

/// Distinct metric names in a metrics TSV, sorted.
inline std::set<std::string> metric_names(const std::string& text) {
  std::set<std::string> names;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    const auto cols = rankdistill::detail::split_ws(line);
    if (cols.size() == 3) names.insert(std::string(cols[0]));
  }
  return names;
}

inline std::vector<ReportRow> build_report(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto manifests = read_manifests(dir);
  check_manifests(dir, manifests);
  std::vector<ReportRow> rows;
  const auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
  rows.push_back({"provenance", "world", manifests.begin()->second.world});
  for (const auto& [stage, m] : manifests) rows.push_back({"provenance", stage, m.config.substr(0, 16)});
  if (fs::exists(path(files::metrics))) {
    const auto text = read_file(path(files::metrics));
    for (const auto& n : metric_names(text))
      rows.push_back({"metric", n, format_score(parse_metric(text, n, path(files::metrics)).mean)});
  }
  if (fs::exists(path(files::diagnostics))) {
    const auto s = parse_report_tsv(read_file(path(files::diagnostics)), path(files::diagnostics));
    rows.push_back({"diagnostics", "queries", std::to_string(s.queries)});
    rows.push_back({"diagnostics", "entropy_p95", format_score(s.entropy.p95)});
    rows.push_back({"diagnostics", "entropy_sd", format_score(s.entropy.sd)});
    rows.push_back({"diagnostics", "diameter_p95", format_score(s.diameter.p95)});
    rows.push_back({"diagnostics", "diameter_sd", format_score(s.diameter.sd)});
    rows.push_back({"diagnostics", "density_ratio_p95", format_score(s.density_ratio.p95)});
    rows.push_back({"diagnostics", "density_ratio_sd", format_score(s.density_ratio.sd)});
  }
  if (fs::exists(path(files::run))) {
    const auto shape = run_shape(parse_run_file(path(files::run)));
    rows.push_back({"powerlaw", "exponent_mean", format_score(shape.exponent)});
    rows.push_back({"powerlaw", "r2_mean", format_score(shape.r2)});
    rows.push_back({"powerlaw", "elbow_median", format_score(shape.elbow)});
  }
  if (fs::exists(path(files::tost))) {
    std::istringstream in(read_file(path(files::tost)));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      const auto cols = rankdistill::detail::split_ws(line);
      if (cols.size() != 9) continue;
      rows.push_back({"tost", std::string(cols[1]) + "~" + std::string(cols[2]),
                      std::string(cols[8]) + " (p=" + std::string(cols[6]) + "," + std::string(cols[7]) + ")"});
    }
  }
  return rows;
}

inline std::string format_report_rows(const std::vector<ReportRow>& rows) {
  std::string out = "section\tkey\tvalue\n";
  for (const auto& r : rows) out += r.section + "\t" + r.key + "\t" + r.value + "\n";
  return out;
}

inline std::string format_report_pretty(const std::vector<ReportRow>& rows) {
  std::size_t w0 = 7, w1 = 3;
  for (const auto& r : rows) {
    w0 = std::max(w0, r.section.size());
    w1 = std::max(w1, r.key.size());
  }
  std::ostringstream out;
  auto line = [&](const std::string& a, const std::string& b, const std::string& c) {
    out << a << std::string(w0 - a.size() + 2, ' ') << b << std::string(w1 - b.size() + 2, ' ') << c << '\n';
  };
  line("section", "key", "value");
  line(std::string(w0, '-'), std::string(w1, '-'), "-----");
  for (const auto& r : rows) line(r.section, r.key, r.value);
  return out.str();
}

}  // namespace rankdistill::pipeline
