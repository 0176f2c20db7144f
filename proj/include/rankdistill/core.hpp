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
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rankdistill {

enum class ErrorKind { parse, validation, config, io, runtime };

/// Single exception type for the library. The kind decides the CLI exit code:
/// parse/validation/config map to 2, io/runtime to 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

/// Opaque identifier; the tag keeps query and document ids from mixing.
/// Ids must be non-empty and contain no whitespace so they survive
/// whitespace-separated file formats.
template <class Tag>
class Id {
 public:
  Id() = default;
  explicit Id(std::string value) : value_(std::move(value)) {
    require(valid(value_), ErrorKind::validation, "invalid identifier '" + value_ + "'");
  }

  static bool valid(std::string_view s) {
    if (s.empty()) return false;
    return std::none_of(s.begin(), s.end(), [](char c) {
      return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    });
  }

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  friend auto operator<=>(const Id&, const Id&) = default;
  friend bool operator==(const Id&, const Id&) = default;

 private:
  std::string value_;
};

struct DocTag {};
struct QueryTag {};
using DocId = Id<DocTag>;
using QueryId = Id<QueryTag>;

struct IdHash {
  template <class Tag>
  std::size_t operator()(const Id<Tag>& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

/// One query with m candidates and optional supervision.
struct TrainingGroup {
  QueryId query_id;
  std::vector<DocId> doc_ids;
  std::optional<std::vector<double>> teacher_scores;
  std::optional<std::vector<int>> labels;
  std::optional<std::size_t> positive_index;

  std::size_t size() const noexcept { return doc_ids.size(); }

  /// Throws a validation error describing the first broken invariant.
  void validate() const {
    const auto m = doc_ids.size();
    const std::string where = "group '" + query_id.str() + "': ";
    require(!query_id.empty(), ErrorKind::validation, "group without query_id");
    if (teacher_scores) {
      require(teacher_scores->size() == m, ErrorKind::validation,
              where + "teacher_scores length " + std::to_string(teacher_scores->size()) +
                  " != doc_ids length " + std::to_string(m));
      for (double s : *teacher_scores)
        require(std::isfinite(s), ErrorKind::validation, where + "non-finite teacher score");
    }
    if (labels) {
      require(labels->size() == m, ErrorKind::validation,
              where + "labels length " + std::to_string(labels->size()) +
                  " != doc_ids length " + std::to_string(m));
      for (int l : *labels)
        require(l == 0 || l == 1, ErrorKind::validation, where + "labels must be 0 or 1");
    }
    if (positive_index) {
      require(*positive_index < m, ErrorKind::validation,
              where + "positive_index " + std::to_string(*positive_index) + " out of range");
      if (labels)
        require((*labels)[*positive_index] == 1, ErrorKind::validation,
                where + "label at positive_index must be 1");
    }
  }
};

struct ScoredEntry {
  DocId doc;
  double score = 0.0;
  friend bool operator==(const ScoredEntry&, const ScoredEntry&) = default;
};

/// Total order used by every ranking: score descending, then DocId ascending.
inline bool ranks_before(const ScoredEntry& a, const ScoredEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc < b.doc;
}

/// A ranked list for one query. Construction sorts and rejects duplicates,
/// so every instance satisfies the ordering invariant.
class ScoredList {
 public:
  ScoredList() = default;
  ScoredList(QueryId query, std::vector<ScoredEntry> entries)
      : query_(std::move(query)), entries_(std::move(entries)) {
    std::sort(entries_.begin(), entries_.end(), ranks_before);
    // Duplicates with different scores are not adjacent after the score sort.
    if (entries_.size() > 1) {
      std::vector<const DocId*> ids;
      ids.reserve(entries_.size());
      for (const auto& e : entries_) ids.push_back(&e.doc);
      std::sort(ids.begin(), ids.end(), [](auto* a, auto* b) { return *a < *b; });
      for (std::size_t i = 1; i < ids.size(); ++i)
        require(!(*ids[i] == *ids[i - 1]), ErrorKind::validation,
                "duplicate doc '" + ids[i]->str() + "' in ranking for '" + query_.str() + "'");
    }
  }

  const QueryId& query_id() const noexcept { return query_; }
  const std::vector<ScoredEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const ScoredEntry& operator[](std::size_t i) const { return entries_[i]; }

  /// Keeps the first k entries.
  ScoredList truncated(std::size_t k) const {
    ScoredList out;
    out.query_ = query_;
    out.entries_.assign(entries_.begin(), entries_.begin() + std::min(k, entries_.size()));
    return out;
  }

  friend bool operator==(const ScoredList&, const ScoredList&) = default;

 private:
  QueryId query_;
  std::vector<ScoredEntry> entries_;
};

using RunMap = std::map<QueryId, ScoredList>;

/// Graded relevance judgments; missing pairs have grade 0.
class Qrels {
 public:
  void set(const QueryId& q, const DocId& d, int grade) {
    require(grade >= 0, ErrorKind::validation,
            "negative grade for (" + q.str() + ", " + d.str() + ")");
    judgments_[q][d] = grade;
  }

  int grade(const QueryId& q, const DocId& d) const {
    auto it = judgments_.find(q);
    if (it == judgments_.end()) return 0;
    auto jt = it->second.find(d);
    return jt == it->second.end() ? 0 : jt->second;
  }

  /// All judgments of one query; empty map when the query is unjudged.
  const std::map<DocId, int>& judged(const QueryId& q) const {
    static const std::map<DocId, int> kEmpty;
    auto it = judgments_.find(q);
    return it == judgments_.end() ? kEmpty : it->second;
  }

  const std::map<QueryId, std::map<DocId, int>>& all() const noexcept { return judgments_; }

 private:
  std::map<QueryId, std::map<DocId, int>> judgments_;
};

using EmbeddingVector = std::vector<double>;

/// Id → vector table with a fixed dimension. Query and document vectors may
/// share a table because their ids are plain strings here.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  void insert(const std::string& id, EmbeddingVector v) {
    if (dim_ == 0) dim_ = v.size();
    require(v.size() == dim_, ErrorKind::validation,
            "embedding '" + id + "' has dimension " + std::to_string(v.size()) + ", expected " +
                std::to_string(dim_));
    for (double x : v) require(std::isfinite(x), ErrorKind::validation, "non-finite embedding '" + id + "'");
    if (index_.emplace(id, rows_.size()).second) {
      ids_.push_back(id);
      rows_.push_back(std::move(v));
    } else {
      rows_[index_.at(id)] = std::move(v);
    }
  }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  const EmbeddingVector& at(const std::string& id) const {
    auto it = index_.find(id);
    require(it != index_.end(), ErrorKind::validation, "missing embedding for '" + id + "'");
    return rows_[it->second];
  }

  const EmbeddingVector* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &rows_[it->second];
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> ids_;
  std::vector<EmbeddingVector> rows_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace rankdistill
