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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rankdistill/core.hpp"
#include "rankdistill/io.hpp"
#include "rankdistill/losses.hpp"
#include "rankdistill/random.hpp"

namespace rankdistill {

enum class StudentKind : std::uint32_t { biencoder = 0, crossencoder = 1 };

inline StudentKind parse_student_kind(std::string_view s) {
  if (s == "biencoder") return StudentKind::biencoder;
  if (s == "crossencoder") return StudentKind::crossencoder;
  fail(ErrorKind::config, "unknown student '" + std::string(s) + "' (expected biencoder or crossencoder)");
}

inline std::string to_string(StudentKind k) { return k == StudentKind::biencoder ? "biencoder" : "crossencoder"; }

/// Trainable scorer over fixed feature vectors.
///
/// biencoder:    f(q, d) = (Wq q + bq) . (Wd d + bd), both maps input_dim -> hidden
/// crossencoder: f(q, d) = w2 . tanh(W1 [q, d, q*d] + b1) + b2
///
/// Parameters live in one flat vector so the optimizer, gradient check and
/// checkpoint code do not care which shape is in use.
class StudentScorer {
 public:
  StudentScorer() = default;
  StudentScorer(StudentKind kind, std::size_t input_dim, std::size_t hidden)
      : kind_(kind), in_(input_dim), hid_(hidden), params_(count(kind, input_dim, hidden), 0.0) {
    require(input_dim >= 1 && hidden >= 1, ErrorKind::config, "student dimensions must be >= 1");
  }

  static std::size_t count(StudentKind kind, std::size_t in, std::size_t hid) {
    return kind == StudentKind::biencoder ? 2 * (hid * in + hid) : hid * 3 * in + hid + hid + 1;
  }

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
  static StudentScorer init(StudentKind kind, std::size_t input_dim, std::size_t hidden, std::uint64_t seed) {
    StudentScorer m(kind, input_dim, hidden);
    Rng rng = make_rng(seed, "init");
    auto fill = [&](std::size_t off, std::size_t n, std::size_t fan_in) {
      const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (std::size_t i = 0; i < n; ++i) m.params_[off + i] = uniform(rng, -a, a);
    };
    const auto& L = m.layout();
    if (kind == StudentKind::biencoder) {
      fill(L.wq, hidden * input_dim, input_dim);
      fill(L.bq, hidden, input_dim);
      fill(L.wd, hidden * input_dim, input_dim);
      fill(L.bd, hidden, input_dim);
    } else {
      fill(L.w1, hidden * 3 * input_dim, 3 * input_dim);
      fill(L.b1, hidden, 3 * input_dim);
      fill(L.w2, hidden, hidden);
      fill(L.b2, 1, hidden);
    }
    return m;
  }

  StudentKind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return in_; }
  std::size_t hidden() const noexcept { return hid_; }
  std::vector<double>& params() noexcept { return params_; }
  const std::vector<double>& params() const noexcept { return params_; }

  /// Offsets of each parameter block inside params().
  struct Layout {
    std::size_t wq = 0, bq = 0, wd = 0, bd = 0;  // biencoder
    std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;  // crossencoder
  };

  Layout layout() const {
    Layout L;
    if (kind_ == StudentKind::biencoder) {
      L.wq = 0;
      L.bq = hid_ * in_;
      L.wd = L.bq + hid_;
      L.bd = L.wd + hid_ * in_;
    } else {
      L.w1 = 0;
      L.b1 = hid_ * 3 * in_;
      L.w2 = L.b1 + hid_;
      L.b2 = L.w2 + hid_;
    }
    return L;
  }

  double score(std::span<const double> q, std::span<const double> d) const {
    check_dims(q, d);
    if (kind_ == StudentKind::biencoder) {
      const auto u = affine(layout().wq, layout().bq, q);
      const auto v = affine(layout().wd, layout().bd, d);
      double s = 0.0;
      for (std::size_t h = 0; h < hid_; ++h) s += u[h] * v[h];
      return s;
    }
    const auto L = layout();
    const auto z = hidden_act(q, d);
    double s = params_[L.b2];
    for (std::size_t h = 0; h < hid_; ++h) s += params_[L.w2 + h] * z[h];
    return s;
  }

  /// Scores for one query against several documents.
  std::vector<double> score_group(std::span<const double> q, const std::vector<const EmbeddingVector*>& docs) const {
    std::vector<double> out(docs.size());
    if (kind_ == StudentKind::biencoder) {
      const auto L = layout();
      const auto u = affine(L.wq, L.bq, q);
      for (std::size_t j = 0; j < docs.size(); ++j) {
        check_dims(q, *docs[j]);
        const auto v = affine(L.wd, L.bd, *docs[j]);
        double s = 0.0;
        for (std::size_t h = 0; h < hid_; ++h) s += u[h] * v[h];
        out[j] = s;
      }
      return out;
    }
    for (std::size_t j = 0; j < docs.size(); ++j) out[j] = score(q, *docs[j]);
    return out;
  }

  /// grad += sum_j dscore[j] * d score(q, docs[j]) / d params.
  void backward(std::span<const double> q, const std::vector<const EmbeddingVector*>& docs,
                std::span<const double> dscore, std::vector<double>& grad) const {
    grad.resize(params_.size(), 0.0);
    const auto L = layout();
    if (kind_ == StudentKind::biencoder) {
      const auto u = affine(L.wq, L.bq, q);
      std::vector<double> du(hid_, 0.0);
      for (std::size_t j = 0; j < docs.size(); ++j) {
        const double g = dscore[j];
        if (g == 0.0) continue;
        const auto& d = *docs[j];
        const auto v = affine(L.wd, L.bd, d);
        for (std::size_t h = 0; h < hid_; ++h) {
          du[h] += g * v[h];
          const double dv = g * u[h];
          for (std::size_t i = 0; i < in_; ++i) grad[L.wd + h * in_ + i] += dv * d[i];
          grad[L.bd + h] += dv;
        }
      }
      for (std::size_t h = 0; h < hid_; ++h) {
        for (std::size_t i = 0; i < in_; ++i) grad[L.wq + h * in_ + i] += du[h] * q[i];
        grad[L.bq + h] += du[h];
      }
      return;
    }
    const std::size_t n = 3 * in_;
    std::vector<double> x(n);
    for (std::size_t j = 0; j < docs.size(); ++j) {
      const double g = dscore[j];
      if (g == 0.0) continue;
      const auto& d = *docs[j];
      joint(q, d, x);
      const auto z = hidden_act(q, d);
      grad[L.b2] += g;
      for (std::size_t h = 0; h < hid_; ++h) {
        grad[L.w2 + h] += g * z[h];
        const double da = g * params_[L.w2 + h] * (1.0 - z[h] * z[h]);
        for (std::size_t i = 0; i < n; ++i) grad[L.w1 + h * n + i] += da * x[i];
        grad[L.b1 + h] += da;
      }
    }
  }

  friend bool operator==(const StudentScorer&, const StudentScorer&) = default;

 private:
  StudentKind kind_ = StudentKind::biencoder;
  std::size_t in_ = 0, hid_ = 0;
  std::vector<double> params_;

  void check_dims(std::span<const double> q, std::span<const double> d) const {
    require(q.size() == in_ && d.size() == in_, ErrorKind::validation,
            "feature dimension mismatch: model expects " + std::to_string(in_) + ", got " + std::to_string(q.size()) +
                " and " + std::to_string(d.size()));
  }

  std::vector<double> affine(std::size_t w, std::size_t b, std::span<const double> x) const {
    std::vector<double> y(hid_);
    for (std::size_t h = 0; h < hid_; ++h) {
      double s = params_[b + h];
      for (std::size_t i = 0; i < in_; ++i) s += params_[w + h * in_ + i] * x[i];
      y[h] = s;
    }
    return y;
  }

  void joint(std::span<const double> q, std::span<const double> d, std::vector<double>& x) const {
    for (std::size_t i = 0; i < in_; ++i) {
      x[i] = q[i];
      x[in_ + i] = d[i];
      x[2 * in_ + i] = q[i] * d[i];
    }
  }

  std::vector<double> hidden_act(std::span<const double> q, std::span<const double> d) const {
    const auto L = layout();
    const std::size_t n = 3 * in_;
    std::vector<double> x(n), z(hid_);
    joint(q, d, x);
    for (std::size_t h = 0; h < hid_; ++h) {
      double a = params_[L.b1 + h];
      for (std::size_t i = 0; i < n; ++i) a += params_[L.w1 + h * n + i] * x[i];
      z[h] = std::tanh(a);
    }
    return z;
  }
};

struct TrainConfig {
  LossKind loss = LossKind::kl;
  std::size_t steps = 2000;
  std::size_t group_size = 16;
  double peak_lr = 1e-2;
  double warmup_frac = 0.1;
  std::uint64_t seed = 1;
  double weight_decay = 0.01;
  double tau = 1.0;

  void validate() const {
    require(group_size >= 2, ErrorKind::config, "train.group_size must be >= 2");
    require(peak_lr > 0, ErrorKind::config, "train.peak_lr must be > 0");
    require(warmup_frac >= 0 && warmup_frac <= 1, ErrorKind::config, "train.warmup_frac must be in [0, 1]");
    require(weight_decay >= 0, ErrorKind::config, "train.weight_decay must be >= 0");
    require(tau > 0, ErrorKind::config, "train.tau must be > 0");
  }
};

/// Linear warmup to peak_lr over warmup_frac * steps, then linear decay to 0 at `steps`.
inline double lr_at(const TrainConfig& c, std::size_t step) {
  if (c.steps == 0) return 0.0;
  const double s = static_cast<double>(std::min(step, c.steps));
  const double total = static_cast<double>(c.steps);
  const double warm = c.warmup_frac * total;
  if (s < warm) return c.peak_lr * s / warm;
  if (total <= warm) return c.peak_lr;
  return c.peak_lr * std::max(0.0, (total - s) / (total - warm));
}

/// Adam with decoupled weight decay (p -= lr * wd * p before the moment step).
class AdamW {
 public:
  AdamW(std::size_t n, double weight_decay) : m_(n, 0.0), v_(n, 0.0), wd_(weight_decay) {}

  void step(std::vector<double>& p, const std::vector<double>& g, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] *= 1.0 - lr * wd_;
      m_[i] = b1 * m_[i] + (1.0 - b1) * g[i];
      v_[i] = b2 * v_[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  std::vector<double> m_, v_;
  double wd_;
  std::uint64_t t_ = 0;
};

namespace detail {

struct GroupFeatures {
  const EmbeddingVector* query;
  std::vector<const EmbeddingVector*> docs;
};

inline GroupFeatures features_for(const TrainingGroup& g, const EmbeddingTable& f) {
  const auto* q = f.find(g.query_id.str());
  require(q != nullptr, ErrorKind::validation, "missing features for query '" + g.query_id.str() + "'");
  GroupFeatures out{q, {}};
  for (const auto& d : g.doc_ids) {
    const auto* v = f.find(d.str());
    require(v != nullptr, ErrorKind::validation,
            "missing features for doc '" + d.str() + "' (query '" + g.query_id.str() + "')");
    out.docs.push_back(v);
  }
  return out;
}

}  // namespace detail

/// Loss of `model` on one group and, when `grad` is non-null, the full
/// parameter gradient.
inline double group_objective(const StudentScorer& model, LossKind loss, const TrainingGroup& g,
                              const EmbeddingTable& features, double tau, std::vector<double>* grad) {
  const auto gf = detail::features_for(g, features);
  const auto scores = model.score_group(*gf.query, gf.docs);
  const auto r = group_loss(loss, scores, g, tau);
  if (grad) {
    grad->assign(model.params().size(), 0.0);
    model.backward(*gf.query, gf.docs, r.grad, *grad);
  }
  return r.value;
}

struct TrainResult {
  StudentScorer model;
  std::vector<double> loss_trace;  // one entry per step
};

/// One group per step, visiting groups in a fresh seeded permutation each epoch.
inline TrainResult train(StudentScorer model, const std::vector<TrainingGroup>& groups, const EmbeddingTable& features,
                         const TrainConfig& cfg) {
  cfg.validate();
  TrainResult out{std::move(model), {}};
  if (cfg.steps == 0) return out;
  require(!groups.empty(), ErrorKind::validation, "training needs at least one group");
  for (const auto& g : groups) {
    check_targets(cfg.loss, g);
    require(g.size() == cfg.group_size, ErrorKind::validation,
            "group '" + g.query_id.str() + "' has " + std::to_string(g.size()) + " candidates, expected " +
                std::to_string(cfg.group_size));
    detail::features_for(g, features);
  }
  AdamW opt(out.model.params().size(), cfg.weight_decay);
  std::vector<std::size_t> order;
  std::vector<double> grad;
  out.loss_trace.reserve(cfg.steps);
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::size_t pos = step % groups.size();
    if (pos == 0) {
      order.resize(groups.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      Rng rng = make_rng(cfg.seed, "epoch", std::to_string(step / groups.size()));
      shuffle(order, rng);
    }
    const auto& g = groups[order[pos]];
    const double value = group_objective(out.model, cfg.loss, g, features, cfg.tau, &grad);
    require(std::isfinite(value), ErrorKind::runtime,
            "non-finite loss at step " + std::to_string(step) + " (query '" + g.query_id.str() + "')");
    out.loss_trace.push_back(value);
    opt.step(out.model.params(), grad, lr_at(cfg, step));
  }
  return out;
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::vector<double> rel_error;  // per parameter
};

/// Analytic parameter gradient against central differences with step h.
/// Coordinates marked in `frozen` are skipped and report 0. The relative error
/// is |a - n| / max(|a|, |n|, floor) so that near-zero gradients are judged on
/// absolute error.
inline GradCheck grad_check(const StudentScorer& model, LossKind loss, const TrainingGroup& g,
                            const EmbeddingTable& features, double tau = 1.0, const std::vector<bool>& frozen = {},
                            double h = 1e-5, double floor = 1e-4) {
  std::vector<double> analytic;
  group_objective(model, loss, g, features, tau, &analytic);
  StudentScorer probe = model;
  GradCheck out;
  out.rel_error.assign(model.params().size(), 0.0);
  for (std::size_t i = 0; i < model.params().size(); ++i) {
    if (i < frozen.size() && frozen[i]) continue;
    const double p0 = model.params()[i];
    probe.params()[i] = p0 + h;
    const double up = group_objective(probe, loss, g, features, tau, nullptr);
    probe.params()[i] = p0 - h;
    const double down = group_objective(probe, loss, g, features, tau, nullptr);
    probe.params()[i] = p0;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    out.rel_error[i] = std::abs(analytic[i] - numeric) / denom;
    out.max_rel_error = std::max(out.max_rel_error, out.rel_error[i]);
  }
  return out;
}

/// Fraction of ordered candidate pairs with distinct teacher scores that the
/// model orders the same way as the teacher. Ties in the model count as misses.
inline double pairwise_agreement(const StudentScorer& model, const std::vector<TrainingGroup>& groups,
                                 const EmbeddingTable& features) {
  std::size_t agree = 0, total = 0;
  for (const auto& g : groups) {
    require(g.teacher_scores.has_value(), ErrorKind::validation,
            "group '" + g.query_id.str() + "' has no teacher scores");
    const auto gf = detail::features_for(g, features);
    const auto f = model.score_group(*gf.query, gf.docs);
    const auto& t = *g.teacher_scores;
    for (std::size_t i = 0; i < f.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) {
        if (i == j || t[i] == t[j]) continue;
        ++total;
        if ((t[i] > t[j] && f[i] > f[j]) || (t[i] < t[j] && f[i] < f[j])) ++agree;
      }
  }
  require(total > 0, ErrorKind::validation, "no teacher-ordered pairs to compare");
  return static_cast<double>(agree) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------
// Checkpoints: "RDSTUDNT", u32 version, u32 kind, u32 input_dim, u32 hidden,
// u64 count, then count little-endian IEEE doubles.

namespace detail {

template <class T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <class T>
T get_le(const std::string& in, std::size_t& pos) {
  require(pos + sizeof(T) <= in.size(), ErrorKind::parse, "truncated checkpoint");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[8] = {'R', 'D', 'S', 'T', 'U', 'D', 'N', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline std::string serialize(const StudentScorer& m) {
  std::string out(kCheckpointMagic, 8);
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.kind()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.input_dim()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.hidden()));
  detail::put_le<std::uint64_t>(out, m.params().size());
  for (double p : m.params()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(p));
  return out;
}

inline StudentScorer deserialize(const std::string& bytes) {
  require(bytes.size() >= 8 && std::memcmp(bytes.data(), kCheckpointMagic, 8) == 0, ErrorKind::parse,
          "not a student checkpoint");
  std::size_t pos = 8;
  const auto version = detail::get_le<std::uint32_t>(bytes, pos);
  require(version == kCheckpointVersion, ErrorKind::parse, "unsupported checkpoint version " + std::to_string(version));
  const auto kind = detail::get_le<std::uint32_t>(bytes, pos);
  require(kind <= 1, ErrorKind::parse, "unknown student kind in checkpoint");
  const auto in = detail::get_le<std::uint32_t>(bytes, pos);
  const auto hid = detail::get_le<std::uint32_t>(bytes, pos);
  const auto n = detail::get_le<std::uint64_t>(bytes, pos);
  StudentScorer m(static_cast<StudentKind>(kind), in, hid);
  require(n == m.params().size(), ErrorKind::parse, "checkpoint parameter count does not match its dimensions");
  for (auto& p : m.params()) {
    p = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes, pos));
    require(std::isfinite(p), ErrorKind::parse, "non-finite parameter in checkpoint");
  }
  require(pos == bytes.size(), ErrorKind::parse, "trailing bytes in checkpoint");
  return m;
}

inline void save_checkpoint(const StudentScorer& m, const std::string& path) { write_text_file(path, serialize(m)); }

inline StudentScorer load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

inline std::string format_loss_trace(const std::vector<double>& trace) {
  std::string out = "step\tloss\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out += std::to_string(i) + '\t' + format_score(trace[i]) + '\n';
  return out;
}

}  // namespace rankdistill
