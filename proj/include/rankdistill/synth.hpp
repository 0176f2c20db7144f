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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <string>
#include <vector>

#include <boost/random/discrete_distribution.hpp>

#include "rankdistill/core.hpp"
#include "rankdistill/io.hpp"
#include "rankdistill/random.hpp"

namespace rankdistill::synth {

/// Hierarchical topic model. Topics are random unit vectors, subtopics are
/// perturbed topics, and every document or query is a perturbed subtopic.
struct WorldConfig {
  std::size_t n_topics = 5;
  std::size_t n_subtopics = 10;  // per topic
  std::size_t n_docs = 500;
  std::size_t n_queries = 100;
  std::size_t vocab_size = 2000;
  std::size_t embed_dim = 16;
  double subtopic_spread = 0.3;
  double doc_noise = 0.1;
  double teacher_noise = 0.25;
  double teacher_temp = 0.08;
  double teacher_scale = 3000.0;
  double topic_word_rate = 0.6;
  std::size_t min_doc_len = 30;
  std::size_t max_doc_len = 80;
  std::size_t query_len = 6;
  std::uint64_t seed = 7;

  void validate() const {
    auto pos = [](std::size_t v, const char* name) {
      require(v >= 1, ErrorKind::config, std::string("world.") + name + " must be >= 1");
    };
    pos(n_topics, "n_topics");
    pos(n_subtopics, "n_subtopics");
    pos(n_docs, "n_docs");
    pos(n_queries, "n_queries");
    pos(embed_dim, "embed_dim");
    pos(min_doc_len, "min_doc_len");
    pos(query_len, "query_len");
    require(vocab_size >= 2 * n_topics, ErrorKind::config, "world.vocab_size must be >= 2 * n_topics");
    require(max_doc_len >= min_doc_len, ErrorKind::config, "world.max_doc_len must be >= min_doc_len");
    require(subtopic_spread >= 0 && doc_noise >= 0 && teacher_noise >= 0, ErrorKind::config,
            "world noise levels must be >= 0");
    require(teacher_temp > 0 && teacher_scale > 0, ErrorKind::config,
            "world.teacher_temp and world.teacher_scale must be > 0");
    require(topic_word_rate >= 0 && topic_word_rate <= 1, ErrorKind::config,
            "world.topic_word_rate must be in [0, 1]");
  }
};

/// Grade from latent cosine similarity: 0.85 / 0.7 / 0.5 thresholds.
inline int grade_of(double sim) {
  if (sim >= 0.85) return 3;
  if (sim >= 0.7) return 2;
  if (sim >= 0.5) return 1;
  return 0;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Noise term of the teacher, a standard normal keyed by (seed, query, doc)
/// so any single pair can be rescored without regenerating the world.
inline double teacher_noise_draw(std::uint64_t seed, const QueryId& q, const DocId& d) {
  Rng rng(stream_seed(seed ^ 0x7eac4e12ULL, q.str(), d.str()));
  return normal(rng);
}

/// Teacher g = scale * exp((sim - 1) / temp) + noise * z(q, d): a monotone
/// convex map of the latent similarity plus Gaussian noise.
inline double teacher_score(const WorldConfig& c, double sim, const QueryId& q, const DocId& d) {
  double g = c.teacher_scale * std::exp((sim - 1.0) / c.teacher_temp);
  if (c.teacher_noise > 0) g += c.teacher_noise * teacher_noise_draw(c.seed, q, d);
  return g;
}

/// Teacher over exported unit embeddings (cosine = dot product).
class Teacher {
 public:
  Teacher(WorldConfig cfg, const EmbeddingTable& emb) : cfg_(std::move(cfg)), emb_(&emb) {}

  double operator()(const QueryId& q, const DocId& d) const {
    const auto& qv = emb_->at(q.str());
    const auto& dv = emb_->at(d.str());
    return teacher_score(cfg_, dot(qv, dv), q, d);
  }

 private:
  WorldConfig cfg_;
  const EmbeddingTable* emb_;
};

struct SyntheticWorld {
  WorldConfig config;
  std::vector<DocId> doc_ids;
  std::vector<QueryId> query_ids;
  std::vector<std::string> doc_text;
  std::vector<std::string> query_text;
  std::vector<EmbeddingVector> doc_emb;
  std::vector<EmbeddingVector> query_emb;
  std::vector<std::vector<double>> sim;  // [query][doc]

  double similarity(std::size_t q, std::size_t d) const { return sim[q][d]; }
  int grade(std::size_t q, std::size_t d) const { return grade_of(sim[q][d]); }
  double teacher(std::size_t q, std::size_t d) const {
    return teacher_score(config, sim[q][d], query_ids[q], doc_ids[d]);
  }

  std::size_t query_index(const QueryId& q) const {
    auto it = std::find(query_ids.begin(), query_ids.end(), q);
    require(it != query_ids.end(), ErrorKind::validation, "query '" + q.str() + "' not in world");
    return static_cast<std::size_t>(it - query_ids.begin());
  }

  Qrels qrels() const {
    Qrels out;
    for (std::size_t q = 0; q < query_ids.size(); ++q)
      for (std::size_t d = 0; d < doc_ids.size(); ++d)
        if (int g = grade(q, d); g > 0) out.set(query_ids[q], doc_ids[d], g);
    return out;
  }

  EmbeddingTable embeddings() const {
    EmbeddingTable t(config.embed_dim);
    for (std::size_t i = 0; i < doc_ids.size(); ++i) t.insert(doc_ids[i].str(), doc_emb[i]);
    for (std::size_t i = 0; i < query_ids.size(); ++i) t.insert(query_ids[i].str(), query_emb[i]);
    return t;
  }
};

namespace detail {

inline std::string padded(char prefix, std::size_t i, std::size_t n) {
  const int width = static_cast<int>(std::to_string(n).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

inline EmbeddingVector gaussian(Rng& rng, std::size_t dim) {
  EmbeddingVector v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

inline void normalize(EmbeddingVector& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n == 0.0) {
    v[0] = 1.0;
    return;
  }
  for (double& x : v) x /= n;
}

inline EmbeddingVector perturbed(const EmbeddingVector& center, double noise, Rng& rng) {
  auto v = gaussian(rng, center.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = center[i] + noise * v[i];
  normalize(v);
  return v;
}

inline std::vector<double> zipf_weights(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / static_cast<double>(r + 1);
  return w;
}

}  // namespace detail

inline std::string word(std::size_t i) { return "w" + std::to_string(i); }

inline SyntheticWorld generate(const WorldConfig& cfg) {
  cfg.validate();
  SyntheticWorld w;
  w.config = cfg;
  const std::size_t n_sub = cfg.n_topics * cfg.n_subtopics;

  Rng geo = make_rng(cfg.seed, "geometry");
  std::vector<EmbeddingVector> topics(cfg.n_topics), subtopics(n_sub);
  for (auto& t : topics) {
    t = detail::gaussian(geo, cfg.embed_dim);
    detail::normalize(t);
  }
  for (std::size_t s = 0; s < n_sub; ++s) subtopics[s] = detail::perturbed(topics[s / cfg.n_subtopics], cfg.subtopic_spread, geo);

  // Vocabulary: the first half is shared background, the rest is split into
  // one contiguous slice per topic.
  const std::size_t background = cfg.vocab_size / 2;
  const std::size_t slice = (cfg.vocab_size - background) / cfg.n_topics;
  boost::random::discrete_distribution<std::size_t> bg_word(detail::zipf_weights(background));
  boost::random::discrete_distribution<std::size_t> topic_word(detail::zipf_weights(slice));

  Rng text = make_rng(cfg.seed, "text");
  std::vector<std::size_t> doc_sub(cfg.n_docs);
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    doc_sub[i] = uniform_index(geo, n_sub);
    w.doc_ids.emplace_back(detail::padded('d', i, cfg.n_docs - 1));
    w.doc_emb.push_back(detail::perturbed(subtopics[doc_sub[i]], cfg.doc_noise, geo));
  }
  for (std::size_t i = 0; i < cfg.n_queries; ++i) {
    const auto s = uniform_index(geo, n_sub);
    w.query_ids.emplace_back(detail::padded('q', i, cfg.n_queries - 1));
    w.query_emb.push_back(detail::perturbed(subtopics[s], cfg.doc_noise, geo));
    const std::size_t t = s / cfg.n_subtopics;
    std::string q;
    for (std::size_t k = 0; k < cfg.query_len; ++k) {
      if (k) q += ' ';
      q += word(background + t * slice + topic_word(text));
    }
    w.query_text.push_back(std::move(q));
  }
  for (std::size_t i = 0; i < cfg.n_docs; ++i) {
    const std::size_t t = doc_sub[i] / cfg.n_subtopics;
    // Topic words appear more often the closer the document sits to its topic.
    const double rate = cfg.topic_word_rate * std::max(0.0, dot(w.doc_emb[i], topics[t]));
    const std::size_t len = cfg.min_doc_len + uniform_index(text, cfg.max_doc_len - cfg.min_doc_len + 1);
    std::string d;
    for (std::size_t k = 0; k < len; ++k) {
      if (k) d += ' ';
      d += uniform(text, 0.0, 1.0) < rate ? word(background + t * slice + topic_word(text)) : word(bg_word(text));
    }
    w.doc_text.push_back(std::move(d));
  }

  w.sim.assign(cfg.n_queries, std::vector<double>(cfg.n_docs));
  for (std::size_t q = 0; q < cfg.n_queries; ++q)
    for (std::size_t d = 0; d < cfg.n_docs; ++d) w.sim[q][d] = dot(w.query_emb[q], w.doc_emb[d]);
  return w;
}

/// Top-k documents by grade, then latent similarity, then DocId. The score
/// grade + (1 + sim) / 4 encodes that order in one number.
inline ScoredList oracle_ranking(const SyntheticWorld& w, std::size_t q, std::size_t k) {
  std::vector<ScoredEntry> all;
  all.reserve(w.doc_ids.size());
  for (std::size_t d = 0; d < w.doc_ids.size(); ++d)
    all.push_back({w.doc_ids[d], w.grade(q, d) + (1.0 + w.sim[q][d]) / 4.0});
  return ScoredList(w.query_ids[q], std::move(all)).truncated(k);
}

/// Deterministic train/test split of query ids; test gets round(frac * n).
inline std::pair<std::vector<QueryId>, std::vector<QueryId>> split_queries(std::vector<QueryId> ids,
                                                                           double test_fraction,
                                                                           std::uint64_t seed) {
  require(test_fraction >= 0 && test_fraction < 1, ErrorKind::config, "test fraction must be in [0, 1)");
  std::sort(ids.begin(), ids.end());
  Rng rng = make_rng(seed, "split");
  shuffle(ids, rng);
  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ids.size())));
  std::vector<QueryId> test(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<QueryId> train(ids.begin() + static_cast<std::ptrdiff_t>(n_test), ids.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

struct WorldFiles {
  std::string corpus, embeddings, qrels, queries;
};

inline WorldFiles format_world(const SyntheticWorld& w) {
  std::vector<std::pair<std::string, std::string>> corpus, queries;
  for (std::size_t i = 0; i < w.doc_ids.size(); ++i) corpus.emplace_back(w.doc_ids[i].str(), w.doc_text[i]);
  for (std::size_t i = 0; i < w.query_ids.size(); ++i) queries.emplace_back(w.query_ids[i].str(), w.query_text[i]);
  return {format_text_table(corpus), format_embeddings(w.embeddings()), format_qrels(w.qrels()),
          format_text_table(queries)};
}

}  // namespace rankdistill::synth
