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
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <span>
#include <thread>
#include <vector>

#include "rankdistill/core.hpp"

namespace rankdistill {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// ln(1 + e^z) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

/// log softmax(x / tau), max-subtracted.
inline std::vector<double> log_softmax(std::span<const double> x, double tau = 1.0) {
  std::vector<double> out(x.size());
  if (x.empty()) return out;
  const double mx = *std::max_element(x.begin(), x.end()) / tau;
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += std::exp(x[i] / tau - mx);
  const double lse = mx + std::log(sum);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / tau - lse;
  return out;
}

inline std::vector<double> softmax(std::span<const double> x, double tau = 1.0) {
  auto out = log_softmax(x, tau);
  for (double& v : out) v = std::exp(v);
  return out;
}

/// p ln p with the 0 ln 0 = 0 convention.
inline double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
inline double sample_sd(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double mu = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

/// Percentile with linear interpolation between closest ranks
/// (position q/100 * (n - 1) in the sorted sample).
inline double percentile(std::vector<double> x, double q) {
  require(!x.empty(), ErrorKind::validation, "percentile of empty sample");
  require(q >= 0.0 && q <= 100.0, ErrorKind::validation, "percentile outside [0, 100]");
  std::sort(x.begin(), x.end());
  const double pos = q / 100.0 * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return x[lo] + frac * (x[hi] - x[lo]);
}

inline double cosine_distance(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  require(na > 0.0 && nb > 0.0, ErrorKind::validation, "cosine distance of a zero vector");
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers using static
/// striping. Callers write results into slot i only, so output does not
/// depend on scheduling. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  std::mutex mu;
  std::vector<std::thread> pool;
  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!first) first = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

}  // namespace rankdistill
