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
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rankdistill/core.hpp"
#include "rankdistill/io.hpp"
#include "rankdistill/numeric.hpp"
#include "rankdistill/random.hpp"

namespace rankdistill {

inline double binary_entropy(double p) {
  require(p >= 0.0 && p <= 1.0, ErrorKind::validation, "binary_entropy: p outside [0, 1]");
  return -xlogx(p) - xlogx(1.0 - p);
}

/// Lower bound on the teacher's misordering probability given entropy H.
/// Clamped at 0 where the raw expression goes negative.
inline double eta(double h) {
  constexpr double ln2 = std::numbers::ln2;
  require(h >= 0.0 && h <= ln2, ErrorKind::validation, "eta: H outside [0, ln 2]");
  return std::max(0.0, 0.5 - std::sqrt((ln2 - h) / 2.0));
}

/// Shannon entropy of softmax(scores / tau).
inline double listwise_entropy(std::span<const double> scores, double tau = 1.0) {
  require(!scores.empty(), ErrorKind::validation, "listwise_entropy of an empty list");
  require(tau > 0.0, ErrorKind::validation, "listwise_entropy: tau must be > 0");
  const auto lp = log_softmax(scores, tau);
  double h = 0.0;
  for (double l : lp) h -= std::exp(l) * l;
  return std::max(0.0, h);
}

/// Mean over ordered pairs of binary_entropy(sigmoid((g_i - g_j) / temp)).
inline double pairwise_entropy(std::span<const double> scores, double temp) {
  require(scores.size() >= 2, ErrorKind::validation, "pairwise_entropy needs at least two scores");
  require(temp > 0.0, ErrorKind::validation, "pairwise_entropy: temp must be > 0");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < scores.size(); ++i)
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (i == j) continue;
      sum += binary_entropy(sigmoid((scores[i] - scores[j]) / temp));
      ++n;
    }
  return sum / static_cast<double>(n);
}

enum class DiameterMode { max, percentile95 };

inline DiameterMode parse_diameter_mode(std::string_view s) {
  if (s == "max") return DiameterMode::max;
  if (s == "percentile95" || s == "p95") return DiameterMode::percentile95;
  fail(ErrorKind::config, "unknown diameter mode '" + std::string(s) + "' (expected max or percentile95)");
}

/// Cosine-distance diameter of a pool. All pairs are used when there are at
/// most `sample_pairs` of them, otherwise `sample_pairs` random pairs.
inline double diameter(std::span<const EmbeddingVector> pool, DiameterMode mode = DiameterMode::max,
                       std::size_t sample_pairs = 100000, std::uint64_t seed = 0) {
  const std::size_t n = pool.size();
  require(n >= 2, ErrorKind::validation, "diameter needs at least two vectors");
  std::vector<double> d;
  const std::size_t all = n * (n - 1) / 2;
  if (all <= sample_pairs) {
    d.reserve(all);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d.push_back(cosine_distance(pool[i], pool[j]));
  } else {
    Rng rng(seed);
    d.reserve(sample_pairs);
    for (std::size_t s = 0; s < sample_pairs; ++s) {
      const auto i = uniform_index(rng, n);
      auto j = uniform_index(rng, n - 1);
      if (j >= i) ++j;
      d.push_back(cosine_distance(pool[i], pool[j]));
    }
  }
  return mode == DiameterMode::max ? *std::max_element(d.begin(), d.end()) : percentile(std::move(d), 95.0);
}

/// sup_j mu(j) / nu(j) with mu uniform and nu proportional to the scores.
/// Non-positive lists are first translated so their minimum is 1e-6.
inline double density_ratio(std::span<const double> scores) {
  require(!scores.empty(), ErrorKind::validation, "density_ratio of an empty list");
  const double lo = *std::min_element(scores.begin(), scores.end());
  const double shift = lo > 0.0 ? 0.0 : 1e-6 - lo;
  double sum = 0.0;
  for (double s : scores) sum += s + shift;
  const double m = static_cast<double>(scores.size());
  double best = 0.0;
  for (double s : scores) best = std::max(best, (1.0 / m) / ((s + shift) / sum));
  return std::max(1.0, best);
}

struct BoundParams {
  double zeta = 1.0;
  double lipschitz = 1.0;
  double vc_dim = 1.0;
  double n = 1.0;
  double delta = 0.05;
  double c = 1.0;

  void validate() const {
    require(zeta > 0 && lipschitz > 0 && vc_dim > 0 && n > 0 && c > 0, ErrorKind::validation,
            "bound parameters must be positive");
    require(delta > 0 && delta < 1, ErrorKind::validation, "bound delta must be in (0, 1)");
  }
};

/// zeta L Delta eta(H) + C sqrt(kappa d ln(1/delta) / n); H is clipped to [0, ln 2].
inline double bound_value(const BoundParams& p, double diameter, double entropy_h, double kappa = 1.0) {
  p.validate();
  require(kappa >= 1.0, ErrorKind::validation, "bound kappa must be >= 1");
  require(diameter >= 0.0, ErrorKind::validation, "bound diameter must be >= 0");
  const double h = std::clamp(entropy_h, 0.0, std::numbers::ln2);
  return p.zeta * p.lipschitz * diameter * eta(h) + p.c * std::sqrt(kappa * p.vc_dim * std::log(1.0 / p.delta) / p.n);
}

struct DiagnosticsConfig {
  double tau = 1.0;
  DiameterMode mode = DiameterMode::max;
  std::size_t sample_pairs = 100000;
  std::uint64_t seed = 0;
  bool include_positive = false;
  unsigned threads = 1;
};

struct QueryDiagnostics {
  QueryId query_id;
  double entropy = 0.0;
  double diameter = 0.0;
  double density_ratio = 1.0;
};

struct Aggregate {
  double p95 = 0.0;
  double sd = 0.0;
};

struct DiagnosticsReport {
  std::vector<QueryDiagnostics> per_query;  // input order
  Aggregate entropy, diameter, density_ratio;
};

inline Aggregate aggregate(const std::vector<double>& v) { return {percentile(v, 95.0), sample_sd(v)}; }

/// Per-query estimates and their 95th-percentile aggregates. By default the
/// positive is left out so the statistics describe the sampled negatives.
inline DiagnosticsReport report(const std::vector<TrainingGroup>& groups, const EmbeddingTable& embeddings,
                                const DiagnosticsConfig& cfg = {}) {
  require(!groups.empty(), ErrorKind::validation, "diagnostics need at least one group");
  DiagnosticsReport rep;
  rep.per_query.resize(groups.size());
  parallel_for(groups.size(), cfg.threads, [&](std::size_t gi) {
    const auto& g = groups[gi];
    const std::string where = "query '" + g.query_id.str() + "': ";
    require(g.teacher_scores.has_value(), ErrorKind::validation, where + "missing teacher scores");
    std::vector<double> scores;
    std::vector<EmbeddingVector> pool;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!cfg.include_positive && g.positive_index && *g.positive_index == j) continue;
      const auto* e = embeddings.find(g.doc_ids[j].str());
      require(e != nullptr, ErrorKind::validation, where + "missing embedding for '" + g.doc_ids[j].str() + "'");
      scores.push_back((*g.teacher_scores)[j]);
      pool.push_back(*e);
    }
    require(pool.size() >= 2, ErrorKind::validation, where + "fewer than two candidates to diagnose");
    auto& out = rep.per_query[gi];
    out.query_id = g.query_id;
    out.entropy = listwise_entropy(scores, cfg.tau);
    out.diameter = diameter(pool, cfg.mode, cfg.sample_pairs, stream_seed(cfg.seed, "diameter", g.query_id.str()));
    out.density_ratio = density_ratio(scores);
  });
  std::vector<double> h, d, k;
  for (const auto& q : rep.per_query) {
    h.push_back(q.entropy);
    d.push_back(q.diameter);
    k.push_back(q.density_ratio);
  }
  rep.entropy = aggregate(h);
  rep.diameter = aggregate(d);
  rep.density_ratio = aggregate(k);
  return rep;
}

/// TSV with a leading section column: "query" rows, then "p95" and "sd".
inline std::string format_report_tsv(const DiagnosticsReport& r) {
  std::ostringstream out;
  out << "section\tquery_id\tentropy\tdiameter\tdensity_ratio\n";
  for (const auto& q : r.per_query)
    out << "query\t" << q.query_id.str() << '\t' << format_score(q.entropy) << '\t' << format_score(q.diameter)
        << '\t' << format_score(q.density_ratio) << '\n';
  out << "p95\tall\t" << format_score(r.entropy.p95) << '\t' << format_score(r.diameter.p95) << '\t'
      << format_score(r.density_ratio.p95) << '\n';
  out << "sd\tall\t" << format_score(r.entropy.sd) << '\t' << format_score(r.diameter.sd) << '\t'
      << format_score(r.density_ratio.sd) << '\n';
  return out.str();
}

inline std::string format_report_table(const DiagnosticsReport& r, const std::string& title = "diagnostics") {
  auto cell = [](const Aggregate& a) { return format_score(a.p95) + " +/- " + format_score(a.sd); };
  std::ostringstream out;
  out << title << " (" << r.per_query.size() << " queries, 95th percentile +/- sd)\n";
  out << "  entropy        " << cell(r.entropy) << '\n';
  out << "  diameter       " << cell(r.diameter) << '\n';
  out << "  density ratio  " << cell(r.density_ratio) << '\n';
  return out.str();
}

/// Reads the aggregate rows back from a report TSV.
struct ReportSummary {
  Aggregate entropy, diameter, density_ratio;
  std::size_t queries = 0;
};

inline ReportSummary parse_report_tsv(const std::string& text, const std::string& origin) {
  ReportSummary s;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool have_p95 = false, have_sd = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cols = detail::split_ws(line);
    if (cols.empty() || cols[0] == "section") continue;
    require(cols.size() == 5, ErrorKind::parse, detail::location(origin, lineno) + ": expected 5 columns");
    if (cols[0] == "query") {
      ++s.queries;
      continue;
    }
    double v[3];
    for (int c = 0; c < 3; ++c) {
      auto x = parse_double(cols[2 + c]);
      require(x.has_value(), ErrorKind::parse, detail::location(origin, lineno) + ": non-numeric value");
      v[c] = *x;
    }
    if (cols[0] == "p95") {
      s.entropy.p95 = v[0], s.diameter.p95 = v[1], s.density_ratio.p95 = v[2];
      have_p95 = true;
    } else if (cols[0] == "sd") {
      s.entropy.sd = v[0], s.diameter.sd = v[1], s.density_ratio.sd = v[2];
      have_sd = true;
    }
  }
  require(have_p95 && have_sd, ErrorKind::parse, origin + ": missing aggregate rows");
  return s;
}

}  // namespace rankdistill
