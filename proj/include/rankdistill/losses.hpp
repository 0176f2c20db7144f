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

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rankdistill/core.hpp"
#include "rankdistill/numeric.hpp"

namespace rankdistill {

enum class Potential { quadratic, neg_binary_entropy };

/// D_phi(a || b) = phi(a) - phi(b) - phi'(b) (a - b).
inline double bregman(Potential phi, double a, double b) {
  switch (phi) {
    case Potential::quadratic:
      return (a - b) * (a - b);
    case Potential::neg_binary_entropy: {
      require(a >= 0.0 && a <= 1.0, ErrorKind::validation, "bregman: a outside [0, 1]");
      require(b > 0.0 && b < 1.0, ErrorKind::validation, "bregman: b outside (0, 1)");
      const double phi_a = xlogx(a) + xlogx(1.0 - a);
      const double phi_b = xlogx(b) + xlogx(1.0 - b);
      const double dphi_b = std::log(b) - std::log1p(-b);
      return std::max(0.0, phi_a - phi_b - dphi_b * (a - b));
    }
  }
  fail(ErrorKind::validation, "unknown potential");
}

struct LossResult {
  double value = 0.0;
  std::vector<double> grad;
};

/// Ordered teacher preferences y_ij = 1[g_i > g_j]; tied pairs are left out.
class PairPrefs {
 public:
  struct Pair {
    std::size_t i, j;
    int y;
  };

  PairPrefs() = default;
  PairPrefs(std::size_t m, std::vector<Pair> pairs) : m_(m), pairs_(std::move(pairs)) {
    for (const auto& p : pairs_)
      require(p.i < m_ && p.j < m_ && p.i != p.j && (p.y == 0 || p.y == 1), ErrorKind::validation,
              "invalid pair preference");
  }

  static PairPrefs from_teacher(std::span<const double> g) {
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        if (i != j && g[i] != g[j]) pairs.push_back({i, j, g[i] > g[j] ? 1 : 0});
    return PairPrefs(g.size(), std::move(pairs));
  }

  std::size_t group_size() const noexcept { return m_; }
  const std::vector<Pair>& pairs() const noexcept { return pairs_; }

 private:
  std::size_t m_ = 0;
  std::vector<Pair> pairs_;
};

namespace detail {
inline void check_group(std::size_t m, const char* what) {
  require(m >= 2, ErrorKind::validation, std::string(what) + " needs at least two candidates");
}
inline void check_tau(double tau) { require(tau > 0.0, ErrorKind::validation, "temperature must be > 0"); }
}  // namespace detail

/// Softmax cross-entropy of the positive at temperature tau.
inline LossResult lce_loss(std::span<const double> scores, std::size_t positive, double tau = 1.0) {
  detail::check_group(scores.size(), "lce");
  detail::check_tau(tau);
  require(positive < scores.size(), ErrorKind::validation, "lce: positive index out of range");
  const auto lp = log_softmax(scores, tau);
  LossResult r{-lp[positive], std::vector<double>(scores.size())};
  for (std::size_t j = 0; j < scores.size(); ++j)
    r.grad[j] = (std::exp(lp[j]) - (j == positive ? 1.0 : 0.0)) / tau;
  return r;
}

inline LossResult ranknet_loss(std::span<const double> student, const PairPrefs& prefs) {
  detail::check_group(student.size(), "ranknet");
  require(prefs.group_size() == student.size(), ErrorKind::validation, "ranknet: preference size mismatch");
  LossResult r{0.0, std::vector<double>(student.size(), 0.0)};
  for (const auto& p : prefs.pairs()) {
    const double s = student[p.i] - student[p.j];
    // -[y ln sigma(s) + (1-y) ln(1 - sigma(s))]
    r.value += p.y ? softplus(-s) : softplus(s);
    const double g = sigmoid(s) - p.y;
    r.grad[p.i] += g;
    r.grad[p.j] -= g;
  }
  return r;
}

inline LossResult margin_mse_loss(std::span<const double> student, std::span<const double> teacher,
                                  std::size_t positive) {
  detail::check_group(student.size(), "margin_mse");
  require(teacher.size() == student.size(), ErrorKind::validation, "margin_mse: missing or mismatched teacher scores");
  require(positive < student.size(), ErrorKind::validation, "margin_mse: positive index out of range");
  LossResult r{0.0, std::vector<double>(student.size(), 0.0)};
  for (std::size_t j = 0; j < student.size(); ++j) {
    if (j == positive) continue;
    const double d = (student[positive] - student[j]) - (teacher[positive] - teacher[j]);
    r.value += d * d;
    r.grad[positive] += 2.0 * d;
    r.grad[j] -= 2.0 * d;
  }
  return r;
}

/// Student-led KL(p_f || p_g) with both lists softmaxed at tau.
inline LossResult kl_loss(std::span<const double> student, std::span<const double> teacher, double tau = 1.0) {
  detail::check_group(student.size(), "kl");
  detail::check_tau(tau);
  require(teacher.size() == student.size(), ErrorKind::validation, "kl: missing or mismatched teacher scores");
  const auto lf = log_softmax(student, tau);
  const auto lg = log_softmax(teacher, tau);
  const std::size_t m = student.size();
  std::vector<double> p(m), a(m);
  double kl = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    p[j] = std::exp(lf[j]);
    a[j] = lf[j] - lg[j];
    if (p[j] > 0.0) kl += p[j] * a[j];
  }
  LossResult r{std::max(0.0, kl), std::vector<double>(m)};
  // d/df_k = p_k (a_k - KL) / tau
  for (std::size_t k = 0; k < m; ++k) r.grad[k] = p[k] * (a[k] - kl) / tau;
  return r;
}

enum class LossKind { lce, ranknet, margin_mse, kl };

inline std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::lce: return "lce";
    case LossKind::ranknet: return "ranknet";
    case LossKind::margin_mse: return "margin_mse";
    case LossKind::kl: return "kl";
  }
  return "?";
}

inline LossKind parse_loss_kind(std::string_view s) {
  if (s == "lce") return LossKind::lce;
  if (s == "ranknet") return LossKind::ranknet;
  if (s == "margin_mse") return LossKind::margin_mse;
  if (s == "kl") return LossKind::kl;
  fail(ErrorKind::config, "unknown loss '" + std::string(s) + "' (expected lce, ranknet, margin_mse or kl)");
}

inline bool needs_teacher(LossKind k) { return k != LossKind::lce; }
inline bool needs_positive(LossKind k) { return k == LossKind::lce || k == LossKind::margin_mse; }

/// Throws a config error when the group cannot supply the loss's targets.
inline void check_targets(LossKind kind, const TrainingGroup& g) {
  if (needs_teacher(kind))
    require(g.teacher_scores.has_value(), ErrorKind::config,
            to_string(kind) + " loss needs teacher_scores; group '" + g.query_id.str() + "' has none");
  if (needs_positive(kind))
    require(g.positive_index.has_value(), ErrorKind::config,
            to_string(kind) + " loss needs positive_index; group '" + g.query_id.str() + "' has none");
}

/// Evaluates `kind` on one group given the student's scores for its candidates.
inline LossResult group_loss(LossKind kind, std::span<const double> student, const TrainingGroup& g,
                             double tau = 1.0) {
  check_targets(kind, g);
  require(student.size() == g.size(), ErrorKind::validation, "student score count != group size");
  switch (kind) {
    case LossKind::lce: return lce_loss(student, *g.positive_index, tau);
    case LossKind::ranknet: return ranknet_loss(student, PairPrefs::from_teacher(*g.teacher_scores));
    case LossKind::margin_mse: return margin_mse_loss(student, *g.teacher_scores, *g.positive_index);
    case LossKind::kl: return kl_loss(student, *g.teacher_scores, tau);
  }
  fail(ErrorKind::validation, "unknown loss");
}

}  // namespace rankdistill
