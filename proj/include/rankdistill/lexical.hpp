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
#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rankdistill/core.hpp"
#include "rankdistill/io.hpp"

namespace rankdistill::lexical {

/// Lowercases and splits on runs of non-alphanumeric ASCII characters.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  void validate() const {
    require(k1 >= 0.0, ErrorKind::config, "bm25 k1 must be >= 0");
    require(b >= 0.0 && b <= 1.0, ErrorKind::config, "bm25 b must be in [0, 1]");
  }
};

struct Posting {
  std::uint32_t doc = 0;  // internal id
  std::uint32_t tf = 0;
  friend bool operator==(const Posting&, const Posting&) = default;
};

class InvertedIndex {
 public:
  InvertedIndex() = default;

  /// Builds from (DocId, text) pairs; internal ids follow input order.
  static InvertedIndex build(const std::vector<std::pair<DocId, std::string>>& corpus) {
    require(!corpus.empty(), ErrorKind::validation, "cannot index an empty corpus");
    InvertedIndex idx;
    idx.doc_ids_.reserve(corpus.size());
    idx.doc_lengths_.reserve(corpus.size());
    std::unordered_set<std::string> seen;
    double total = 0.0;
    for (std::uint32_t i = 0; i < corpus.size(); ++i) {
      const auto& [id, text] = corpus[i];
      require(seen.insert(id.str()).second, ErrorKind::validation, "duplicate doc id '" + id.str() + "'");
      const auto terms = tokenize(text);
      std::map<std::string, std::uint32_t> counts;
      for (const auto& t : terms) ++counts[t];
      for (auto& [term, tf] : counts) idx.postings_[term].push_back({i, tf});
      idx.doc_ids_.push_back(id);
      idx.doc_lengths_.push_back(static_cast<std::uint32_t>(terms.size()));
      total += static_cast<double>(terms.size());
    }
    idx.avgdl_ = total / static_cast<double>(corpus.size());
    idx.index_ids();
    return idx;
  }

  static InvertedIndex build(const std::map<DocId, std::string>& corpus) {
    return build(std::vector<std::pair<DocId, std::string>>(corpus.begin(), corpus.end()));
  }

  std::size_t size() const noexcept { return doc_ids_.size(); }
  double avgdl() const noexcept { return avgdl_; }
  const std::vector<DocId>& doc_ids() const noexcept { return doc_ids_; }
  const std::vector<std::uint32_t>& doc_lengths() const noexcept { return doc_lengths_; }
  std::size_t vocabulary_size() const noexcept { return postings_.size(); }

  const std::vector<Posting>& postings(const std::string& term) const {
    static const std::vector<Posting> kEmpty;
    auto it = postings_.find(term);
    return it == postings_.end() ? kEmpty : it->second;
  }

  std::size_t df(const std::string& term) const { return postings(term).size(); }

  std::size_t internal_id(const DocId& d) const {
    auto it = lookup_.find(d.str());
    require(it != lookup_.end(), ErrorKind::validation, "unknown doc '" + d.str() + "'");
    return it->second;
  }

  /// Plain-text snapshot: header, one line per doc, one line per term.
  std::string snapshot() const {
    std::ostringstream out;
    out << "rankdistill-index 1 " << doc_ids_.size() << ' ' << postings_.size() << '\n';
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) out << doc_ids_[i].str() << ' ' << doc_lengths_[i] << '\n';
    std::vector<const std::string*> terms;
    for (const auto& [t, _] : postings_) terms.push_back(&t);
    std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return *a < *b; });
    for (const auto* t : terms) {
      out << *t;
      for (const auto& p : postings_.at(*t)) out << ' ' << p.doc << ':' << p.tf;
      out << '\n';
    }
    return out.str();
  }

  static InvertedIndex from_snapshot(const std::string& text) {
    std::istringstream in(text);
    std::string magic;
    int version = 0;
    std::size_t ndocs = 0, nterms = 0;
    in >> magic >> version >> ndocs >> nterms;
    require(magic == "rankdistill-index" && version == 1 && in, ErrorKind::parse, "not an index snapshot");
    InvertedIndex idx;
    double total = 0.0;
    for (std::size_t i = 0; i < ndocs; ++i) {
      std::string id;
      std::uint32_t len = 0;
      in >> id >> len;
      require(static_cast<bool>(in), ErrorKind::parse, "truncated index snapshot");
      idx.doc_ids_.emplace_back(id);
      idx.doc_lengths_.push_back(len);
      total += len;
    }
    std::string line;
    std::getline(in, line);
    for (std::size_t t = 0; t < nterms; ++t) {
      require(static_cast<bool>(std::getline(in, line)), ErrorKind::parse, "truncated index snapshot");
      const auto cols = detail::split_ws(line);
      require(!cols.empty(), ErrorKind::parse, "empty posting line");
      auto& list = idx.postings_[std::string(cols[0])];
      for (std::size_t c = 1; c < cols.size(); ++c) {
        const auto colon = cols[c].find(':');
        auto doc = parse_int(cols[c].substr(0, colon));
        auto tf = parse_int(cols[c].substr(colon + 1));
        require(colon != std::string_view::npos && doc && tf && *doc >= 0 &&
                    static_cast<std::size_t>(*doc) < ndocs,
                ErrorKind::parse, "bad posting '" + std::string(cols[c]) + "'");
        list.push_back({static_cast<std::uint32_t>(*doc), static_cast<std::uint32_t>(*tf)});
      }
    }
    idx.avgdl_ = ndocs ? total / static_cast<double>(ndocs) : 0.0;
    idx.index_ids();
    return idx;
  }

 private:
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<std::uint32_t> doc_lengths_;
  std::vector<DocId> doc_ids_;
  double avgdl_ = 0.0;
  std::unordered_map<std::string, std::size_t> lookup_;

  void index_ids() {
    lookup_.clear();
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) lookup_.emplace(doc_ids_[i].str(), i);
  }
};

/// Non-negative (Lucene-style) idf.
inline double bm25_idf(std::size_t n_docs, std::size_t df) {
  const double n = static_cast<double>(n_docs), f = static_cast<double>(df);
  return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

inline double bm25_term_weight(const Bm25Params& p, double tf, double dl, double avgdl) {
  return tf * (p.k1 + 1.0) / (tf + p.k1 * (1.0 - p.b + p.b * dl / avgdl));
}

/// Scores every document for the query, term-at-a-time. Repeated query terms
/// contribute once per occurrence. Unmatched documents keep score 0.
inline std::vector<double> bm25_scores(const InvertedIndex& index, const Bm25Params& params,
                                       std::string_view query) {
  std::vector<double> scores(index.size(), 0.0);
  for (const auto& term : tokenize(query)) {
    const auto& plist = index.postings(term);
    if (plist.empty()) continue;
    const double idf = bm25_idf(index.size(), plist.size());
    for (const auto& p : plist)
      scores[p.doc] += idf * bm25_term_weight(params, p.tf, index.doc_lengths()[p.doc], index.avgdl());
  }
  return scores;
}

/// Top-k documents matching at least one query term, excluding `exclude`.
inline ScoredList bm25_topk(const InvertedIndex& index, const Bm25Params& params, const QueryId& qid,
                            std::string_view query, std::size_t k, const std::set<DocId>& exclude = {}) {
  require(k >= 1, ErrorKind::validation, "bm25_topk requires k >= 1");
  params.validate();
  const auto scores = bm25_scores(index, params, query);
  std::vector<bool> matched(index.size(), false);
  for (const auto& term : tokenize(query))
    for (const auto& p : index.postings(term)) matched[p.doc] = true;
  std::vector<ScoredEntry> hits;
  for (std::size_t i = 0; i < index.size(); ++i)
    if (matched[i] && !exclude.count(index.doc_ids()[i])) hits.push_back({index.doc_ids()[i], scores[i]});
  const auto keep = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), ranks_before);
  hits.resize(keep);
  return ScoredList(qid, std::move(hits));
}

}  // namespace rankdistill::lexical
