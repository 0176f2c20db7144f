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
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "rankdistill/core.hpp"
#include "rankdistill/diagnostics.hpp"
#include "rankdistill/lexical.hpp"
#include "rankdistill/numeric.hpp"
#include "rankdistill/random.hpp"

namespace rankdistill {

enum class SamplerKind { random, bm25, teacher, ensemble };

inline std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::random: return "random";
    case SamplerKind::bm25: return "bm25";
    case SamplerKind::teacher: return "teacher";
    case SamplerKind::ensemble: return "ensemble";
  }
  return "?";
}

inline SamplerKind parse_sampler_kind(std::string_view s) {
  if (s == "random") return SamplerKind::random;
  if (s == "bm25") return SamplerKind::bm25;
  if (s == "teacher") return SamplerKind::teacher;
  if (s == "ensemble") return SamplerKind::ensemble;
  fail(ErrorKind::config, "unknown sampler '" + std::string(s) + "' (expected random, bm25, teacher or ensemble)");
}

/// How the ensemble filter measures closeness to the positive.
enum class FilterDistance { teacher_score, embedding };

struct SamplerSpec {
  SamplerKind kind = SamplerKind::random;
  std::size_t k = 15;
  std::size_t pool_depth = 100;
  std::uint64_t seed = 0;
  std::size_t ensemble_depth = 200;  // pool size each ensemble constituent contributes
  std::vector<SamplerKind> constituents{SamplerKind::bm25, SamplerKind::teacher};
  double epsilon = 0.0;
  FilterDistance distance = FilterDistance::teacher_score;

  void validate() const {
    require(k >= 1, ErrorKind::config, "sampler k must be >= 1");
    require(pool_depth >= k, ErrorKind::config, "sampler pool_depth must be >= k");
    require(ensemble_depth >= k, ErrorKind::config, "sampler ensemble_depth must be >= k");
    require(epsilon >= 0, ErrorKind::config, "sampler epsilon must be >= 0");
    if (kind == SamplerKind::ensemble) {
      require(!constituents.empty(), ErrorKind::config, "ensemble needs at least one constituent");
      for (auto c : constituents)
        require(c != SamplerKind::ensemble, ErrorKind::config, "ensemble cannot contain itself");
    }
  }
};

using TeacherFn = std::function<double(const QueryId&, const DocId&)>;

/// What the samplers may consult. bm25 and teacher need `index`; teacher and
/// ensemble need `teacher`; the embedding filter needs `embeddings`.
struct CorpusHandles {
  const lexical::InvertedIndex* index = nullptr;
  TeacherFn teacher;
  const std::vector<DocId>* docs = nullptr;
  const EmbeddingTable* embeddings = nullptr;
  lexical::Bm25Params bm25{};
};

struct Query {
  QueryId id;
  std::string text;
};

namespace detail {

inline const std::vector<DocId>& doc_list(const CorpusHandles& h) {
  if (h.docs) return *h.docs;
  require(h.index != nullptr, ErrorKind::config, "sampler needs a document list or an index");
  return h.index->doc_ids();
}

inline std::vector<DocId> random_pool(const Query& q, const DocId& positive, const CorpusHandles& h,
                                      std::size_t n, std::uint64_t seed) {
  std::vector<DocId> others;
  for (const auto& d : doc_list(h))
    if (!(d == positive)) others.push_back(d);
  Rng rng = make_rng(seed, "random", q.id.str());
  std::vector<DocId> out;
  for (auto i : sample_without_replacement(others.size(), n, rng)) out.push_back(others[i]);
  return out;
}

inline std::vector<DocId> bm25_pool(const Query& q, const DocId& positive, const CorpusHandles& h, std::size_t n) {
  require(h.index != nullptr, ErrorKind::config, "bm25-based sampling needs an index");
  const auto list = lexical::bm25_topk(*h.index, h.bm25, q.id, q.text, n, {positive});
  std::vector<DocId> out;
  for (const auto& e : list.entries()) out.push_back(e.doc);
  return out;
}

inline std::vector<DocId> top_by_teacher(const Query& q, const std::vector<DocId>& pool, const CorpusHandles& h,
                                         std::size_t k) {
  require(static_cast<bool>(h.teacher), ErrorKind::config, "teacher-based sampling needs a teacher");
  std::vector<ScoredEntry> scored;
  for (const auto& d : pool) scored.push_back({d, h.teacher(q.id, d)});
  const auto list = ScoredList(q.id, std::move(scored)).truncated(k);
  std::vector<DocId> out;
  for (const auto& e : list.entries()) out.push_back(e.doc);
  return out;
}

inline void check_pool(const Query& q, std::size_t have, std::size_t k, const char* what) {
  require(have >= k, ErrorKind::validation,
          "query '" + q.id.str() + "': " + what + " pool has " + std::to_string(have) +
              " candidates, fewer than k=" + std::to_string(k));
}

/// Candidate pool a constituent contributes to an ensemble.
inline std::vector<DocId> constituent_pool(SamplerKind kind, const Query& q, const DocId& positive,
                                           const CorpusHandles& h, const SamplerSpec& spec) {
  switch (kind) {
    case SamplerKind::random: return random_pool(q, positive, h, spec.ensemble_depth, spec.seed);
    case SamplerKind::bm25: return bm25_pool(q, positive, h, spec.ensemble_depth);
    case SamplerKind::teacher: return bm25_pool(q, positive, h, spec.pool_depth);
    case SamplerKind::ensemble: break;
  }
  fail(ErrorKind::config, "ensemble cannot contain itself");
}

}  // namespace detail

/// k distinct negatives for one query, never including the positive.
inline std::vector<DocId> sample_negatives(const SamplerSpec& spec, const Query& q, const DocId& positive,
                                           const CorpusHandles& h) {
  spec.validate();
  const std::size_t k = spec.k;
  switch (spec.kind) {
    case SamplerKind::random: {
      auto out = detail::random_pool(q, positive, h, k, spec.seed);
      detail::check_pool(q, out.size(), k, "random");
      return out;
    }
    case SamplerKind::bm25: {
      auto out = detail::bm25_pool(q, positive, h, k);
      detail::check_pool(q, out.size(), k, "bm25");
      return out;
    }
    case SamplerKind::teacher: {
      const auto pool = detail::bm25_pool(q, positive, h, spec.pool_depth);
      detail::check_pool(q, pool.size(), k, "teacher");
      return detail::top_by_teacher(q, pool, h, k);
    }
    case SamplerKind::ensemble: {
      std::set<DocId> merged;
      for (auto c : spec.constituents) {
        const auto pool = detail::constituent_pool(c, q, positive, h, spec);
        merged.insert(pool.begin(), pool.end());
      }
      std::vector<DocId> kept;
      if (spec.distance == FilterDistance::teacher_score) {
        require(static_cast<bool>(h.teacher), ErrorKind::config, "ensemble filter needs a teacher");
        const double gp = h.teacher(q.id, positive);
        for (const auto& d : merged)
          if (std::abs(h.teacher(q.id, d) - gp) > spec.epsilon) kept.push_back(d);
      } else {
        require(h.embeddings != nullptr, ErrorKind::config, "embedding filter needs embeddings");
        const auto& pv = h.embeddings->at(positive.str());
        for (const auto& d : merged)
          if (cosine_distance(h.embeddings->at(d.str()), pv) > spec.epsilon) kept.push_back(d);
      }
      detail::check_pool(q, kept.size(), k, "filtered ensemble");
      return detail::top_by_teacher(q, kept, h, k);
    }
  }
  fail(ErrorKind::config, "unknown sampler");
}

enum class QuartileBand { lower, inner, upper, outlier };

inline QuartileBand parse_band(std::string_view s) {
  if (s == "lower") return QuartileBand::lower;
  if (s == "inner") return QuartileBand::inner;
  if (s == "upper") return QuartileBand::upper;
  if (s == "outlier") return QuartileBand::outlier;
  fail(ErrorKind::config, "unknown quartile band '" + std::string(s) + "' (expected lower, inner, upper or outlier)");
}

inline std::string to_string(QuartileBand b) {
  switch (b) {
    case QuartileBand::lower: return "lower";
    case QuartileBand::inner: return "inner";
    case QuartileBand::upper: return "upper";
    case QuartileBand::outlier: return "outlier";
  }
  return "?";
}

using EntropyFn = std::function<double(const TrainingGroup&)>;

inline EntropyFn listwise_entropy_fn(double tau = 1.0) {
  return [tau](const TrainingGroup& g) {
    require(g.teacher_scores.has_value(), ErrorKind::validation,
            "group '" + g.query_id.str() + "' has no teacher scores");
    return listwise_entropy(*g.teacher_scores, tau);
  };
}

/// Keeps the groups whose entropy falls in `band` relative to the corpus
/// quartiles Q1 and Q3. Inner is inclusive at both ends; order is preserved.
inline std::vector<TrainingGroup> quartile_filter(const std::vector<TrainingGroup>& groups, QuartileBand band,
                                                  const EntropyFn& entropy = listwise_entropy_fn()) {
  require(!groups.empty(), ErrorKind::validation, "quartile_filter on an empty group list");
  std::vector<double> h;
  h.reserve(groups.size());
  for (const auto& g : groups) h.push_back(entropy(g));
  const double q1 = percentile(h, 25.0), q3 = percentile(h, 75.0);
  std::vector<TrainingGroup> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const bool lower = h[i] < q1, upper = h[i] > q3;
    bool keep = false;
    switch (band) {
      case QuartileBand::lower: keep = lower; break;
      case QuartileBand::upper: keep = upper; break;
      case QuartileBand::inner: keep = !lower && !upper; break;
      case QuartileBand::outlier: keep = lower || upper; break;
    }
    if (keep) out.push_back(groups[i]);
  }
  return out;
}

}  // namespace rankdistill
