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
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "rankdistill/core.hpp"
#include "rankdistill/io.hpp"
#include "rankdistill/numeric.hpp"

namespace rankdistill {

/// DCG with raw grade gain and log2(r + 1) discount, normalized by the
/// ideal ordering of the query's judgments. 0 when nothing is relevant.
inline double ndcg_at_k(const ScoredList& run, const Qrels& qrels, std::size_t k) {
  require(k >= 1, ErrorKind::validation, "ndcg cutoff must be >= 1");
  const auto& q = run.query_id();
  double dcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, run.size()); ++r)
    dcg += qrels.grade(q, run[r].doc) / std::log2(static_cast<double>(r) + 2.0);
  std::vector<int> ideal;
  for (const auto& [d, g] : qrels.judged(q))
    if (g > 0) ideal.push_back(g);
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  double idcg = 0.0;
  for (std::size_t r = 0; r < std::min(k, ideal.size()); ++r) idcg += ideal[r] / std::log2(static_cast<double>(r) + 2.0);
  return idcg > 0.0 ? dcg / idcg : 0.0;
}

/// Average precision with relevance = grade >= 1, over the full list.
inline double average_precision(const ScoredList& run, const Qrels& qrels) {
  const auto& q = run.query_id();
  std::size_t total = 0;
  for (const auto& [d, g] : qrels.judged(q))
    if (g >= 1) ++total;
  if (total == 0) return 0.0;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < run.size(); ++r)
    if (qrels.grade(q, run[r].doc) >= 1) sum += static_cast<double>(++hits) / static_cast<double>(r + 1);
  return sum / static_cast<double>(total);
}

struct MetricResult {
  std::string metric;
  std::map<QueryId, double> per_query;
  double mean = 0.0;
};

enum class Metric { ndcg, map };

/// Metric over every query of the run. Names follow "ndcg_cut_10" / "map".
inline MetricResult evaluate(const RunMap& run, const Qrels& qrels, Metric metric, std::size_t k = 10) {
  MetricResult r;
  r.metric = metric == Metric::ndcg ? "ndcg_cut_" + std::to_string(k) : "map";
  std::vector<double> v;
  for (const auto& [q, list] : run) {
    const double x = metric == Metric::ndcg ? ndcg_at_k(list, qrels, k) : average_precision(list, qrels);
    r.per_query[q] = x;
    v.push_back(x);
  }
  r.mean = mean(v);
  return r;
}

/// metric<TAB>qid<TAB>value rows, then an "all" row with the mean.
inline std::string format_metrics(const std::vector<MetricResult>& results) {
  std::ostringstream out;
  for (const auto& r : results) {
    for (const auto& [q, v] : r.per_query) out << r.metric << '\t' << q.str() << '\t' << format_score(v) << '\n';
    out << r.metric << "\tall\t" << format_score(r.mean) << '\n';
  }
  return out.str();
}

/// Per-query values of one metric from a metrics TSV, plus its "all" row.
inline MetricResult parse_metric(const std::string& text, const std::string& metric, const std::string& origin) {
  MetricResult r;
  r.metric = metric;
  bool have_all = false;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto cols = detail::split_ws(line);
    if (cols.empty()) continue;
    require(cols.size() == 3, ErrorKind::parse, detail::location(origin, lineno) + ": expected 3 columns");
    if (cols[0] != metric) continue;
    const auto v = parse_double(cols[2]);
    require(v.has_value(), ErrorKind::parse, detail::location(origin, lineno) + ": non-numeric value");
    if (cols[1] == "all") {
      r.mean = *v;
      have_all = true;
    } else {
      r.per_query[QueryId(std::string(cols[1]))] = *v;
    }
  }
  require(have_all, ErrorKind::parse, origin + ": no '" + metric + "' rows");
  return r;
}

struct TostResult {
  double mu1 = 0.0, mu2 = 0.0;
  double theta = 0.0;
  double p_lower = 1.0, p_upper = 1.0;
  bool equivalent = false;
};

/// Paired two one-sided t-tests on d = b - a with margin
/// theta = epsilon * max(|mu1|, |mu2|).
inline TostResult tost(const std::vector<double>& a, const std::vector<double>& b, double alpha = 0.05,
                       double epsilon = 0.05) {
  require(a.size() == b.size(), ErrorKind::validation, "tost: samples differ in length");
  require(a.size() >= 3, ErrorKind::validation, "tost needs at least three paired values");
  require(alpha > 0 && alpha < 1, ErrorKind::validation, "tost: alpha must be in (0, 1)");
  require(epsilon >= 0, ErrorKind::validation, "tost: epsilon must be >= 0");
  TostResult r;
  r.mu1 = mean(a);
  r.mu2 = mean(b);
  r.theta = epsilon * std::max(std::abs(r.mu1), std::abs(r.mu2));
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
  const double dbar = mean(d);
  const double se = sample_sd(d) / std::sqrt(static_cast<double>(d.size()));
  if (se == 0.0) {
    // Degenerate: every difference equals dbar, so each test is decided exactly.
    r.p_lower = dbar > -r.theta ? 0.0 : 1.0;
    r.p_upper = dbar < r.theta ? 0.0 : 1.0;
  } else {
    const boost::math::students_t dist(static_cast<double>(d.size() - 1));
    r.p_lower = boost::math::cdf(boost::math::complement(dist, (dbar + r.theta) / se));  // H0: delta <= -theta
    r.p_upper = boost::math::cdf(dist, (dbar - r.theta) / se);                          // H0: delta >= theta
  }
  r.equivalent = std::max(r.p_lower, r.p_upper) < alpha;
  return r;
}

struct PowerLawFit {
  double exponent = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t elbow_rank = 0;
};

/// Least-squares line through (ln rank, ln score) for ranks [first, last]
/// (1-based, inclusive; last = 0 means the end of the list). Lists with a
/// non-positive score in range are shifted so the minimum becomes 1e-6.
inline PowerLawFit powerlaw_fit(const ScoredList& run, std::size_t first = 1, std::size_t last = 0) {
  if (last == 0) last = run.size();
  require(first >= 1 && last <= run.size() && first <= last, ErrorKind::validation, "power-law rank range out of bounds");
  require(last - first + 1 >= 3, ErrorKind::validation, "power-law fit needs at least three points");
  std::vector<double> x, y;
  double lo = run[first - 1].score;
  for (std::size_t r = first; r <= last; ++r) lo = std::min(lo, run[r - 1].score);
  const double shift = lo > 0.0 ? 0.0 : 1e-6 - lo;
  for (std::size_t r = first; r <= last; ++r) {
    x.push_back(std::log(static_cast<double>(r)));
    y.push_back(std::log(run[r - 1].score + shift));
  }
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  PowerLawFit f;
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.exponent * x[i]);
    ss_res += e * e;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  // Elbow: point farthest from the chord joining the first and last points.
  const double dx = x.back() - x.front(), dy = y.back() - y.front();
  const double norm = std::hypot(dx, dy);
  double best = -1.0;
  f.elbow_rank = first;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dist = std::abs(dy * (x[i] - x.front()) - dx * (y[i] - y.front())) / norm;
    if (dist > best) {
      best = dist;
      f.elbow_rank = first + i;
    }
  }
  return f;
}

}  // namespace rankdistill
