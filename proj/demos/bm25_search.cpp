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

// Builds a BM25 index over a handful of documents and prints the top hits
// for each query given on the command line (or a few defaults).

#include <iomanip>
#include <iostream>
#include <map>

#include "rankdistill/lexical.hpp"

using namespace rankdistill;

int main(int argc, char** argv) {
  const std::map<DocId, std::string> corpus{
      {DocId("d1"), "the cat sat on the mat"},
      {DocId("d2"), "dogs and cats living together"},
      {DocId("d3"), "a quick brown fox jumps over the lazy dog"},
      {DocId("d4"), "stock markets fell sharply on monday"},
      {DocId("d5"), "the market for cat food grew this year"},
  };
  const auto index = lexical::InvertedIndex::build(corpus);

  std::vector<std::string> queries;
  for (int i = 1; i < argc; ++i) queries.emplace_back(argv[i]);
  if (queries.empty()) queries = {"cat", "lazy dog", "market crash"};

  const lexical::Bm25Params params;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto hits = lexical::bm25_topk(index, params, QueryId("q" + std::to_string(i)), queries[i], 3);
    std::cout << "query: " << queries[i] << '\n';
    if (hits.empty()) std::cout << "  (no matches)\n";
    for (const auto& h : hits.entries())
      std::cout << "  " << h.doc.str() << '\t' << std::fixed << std::setprecision(4) << h.score << '\t'
                << corpus.at(h.doc) << '\n';
  }
}
