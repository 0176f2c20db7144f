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

// Text file formats shared by every stage:
//   run file      qid Q0 docid rank score tag        (scores at 6 decimals)
//   groups        one JSON object per line
//   qrels         qid 0 docid grade
//   corpus        docid<TAB>text
//   queries       qid<TAB>text
//   embeddings    id<TAB>comma-separated floats

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rankdistill/core.hpp"

namespace rankdistill {

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

inline bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline std::string location(const std::string& path, std::size_t line) {
  return path + ":" + std::to_string(line);
}

}  // namespace detail

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::io, "cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::io, "cannot open '" + path + "' for writing");
  return out;
}

inline void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  require(static_cast<bool>(out), ErrorKind::io, "write failed for '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Parses a double; the whole token must be consumed.
inline std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

inline std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

/// Fixed 6-decimal rendering used for every serialized score.
inline std::string format_score(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 6);
  require(ec == std::errc(), ErrorKind::runtime, "score formatting failed");
  std::string s(buf, ptr);
  if (s == "-0.000000") s = "0.000000";
  return s;
}

/// Shortest representation that round-trips exactly.
inline std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  require(ec == std::errc(), ErrorKind::runtime, "number formatting failed");
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Run files

inline RunMap parse_run_text(const std::string& text, const std::string& origin = "<run>") {
  std::map<QueryId, std::vector<ScoredEntry>> grouped;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::blank(line)) continue;
    const auto cols = detail::split_ws(line);
    const auto where = detail::location(origin, lineno);
    require(cols.size() == 6, ErrorKind::parse,
            where + ": expected 6 columns, found " + std::to_string(cols.size()));
    require(cols[1] == "Q0", ErrorKind::parse, where + ": second column must be Q0");
    auto score = parse_double(cols[4]);
    require(score.has_value() && std::isfinite(*score), ErrorKind::parse,
            where + ": non-numeric score '" + std::string(cols[4]) + "'");
    grouped[QueryId(std::string(cols[0]))].push_back({DocId(std::string(cols[2])), *score});
  }
  RunMap out;
  for (auto& [q, entries] : grouped) out.emplace(q, ScoredList(q, std::move(entries)));
  return out;
}

/// Input rank column is ignored; ranks come from the sorted order.
inline RunMap parse_run_file(const std::string& path) { return parse_run_text(read_file(path), path); }

inline std::string format_run(const RunMap& lists, const std::string& tag) {
  require(detail::split_ws(tag).size() == 1 && tag.find_first_of(" \t") == std::string::npos,
          ErrorKind::validation, "run tag must be a single token");
  std::string out;
  for (const auto& [q, list] : lists) {
    std::size_t rank = 1;
    for (const auto& e : list.entries()) {
      out += q.str();
      out += " Q0 ";
      out += e.doc.str();
      out += ' ';
      out += std::to_string(rank++);
      out += ' ';
      out += format_score(e.score);
      out += ' ';
      out += tag;
      out += '\n';
    }
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
  finish_output(out, path);
}

inline void write_run_file(const RunMap& lists, const std::string& tag, const std::string& path) {
  write_text_file(path, format_run(lists, tag));
}

// ---------------------------------------------------------------------------
// Training groups (JSONL)

inline TrainingGroup group_from_json(const nlohmann::json& j, const std::string& where) {
  require(j.is_object(), ErrorKind::parse, where + ": expected a JSON object");
  require(j.contains("query_id") && j["query_id"].is_string(), ErrorKind::parse,
          where + ": missing query_id");
  require(j.contains("doc_ids") && j["doc_ids"].is_array(), ErrorKind::parse, where + ": missing doc_ids");
  TrainingGroup g;
  try {
    g.query_id = QueryId(j["query_id"].get<std::string>());
    for (const auto& d : j["doc_ids"]) g.doc_ids.emplace_back(d.get<std::string>());
    if (j.contains("teacher_scores") && !j["teacher_scores"].is_null())
      g.teacher_scores = j["teacher_scores"].get<std::vector<double>>();
    if (j.contains("labels") && !j["labels"].is_null()) g.labels = j["labels"].get<std::vector<int>>();
    if (j.contains("positive_index") && !j["positive_index"].is_null())
      g.positive_index = j["positive_index"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::parse, where + ": " + e.what());
  } catch (const Error& e) {
    fail(ErrorKind::validation, where + ": " + e.what());
  }
  try {
    g.validate();
  } catch (const Error& e) {
    fail(ErrorKind::validation, where + ": " + e.what());
  }
  return g;
}

inline nlohmann::ordered_json group_to_json(const TrainingGroup& g) {
  nlohmann::ordered_json j;
  j["query_id"] = g.query_id.str();
  auto ids = nlohmann::ordered_json::array();
  for (const auto& d : g.doc_ids) ids.push_back(d.str());
  j["doc_ids"] = std::move(ids);
  if (g.teacher_scores) j["teacher_scores"] = *g.teacher_scores;
  if (g.labels) j["labels"] = *g.labels;
  if (g.positive_index) j["positive_index"] = *g.positive_index;
  return j;
}

inline std::vector<TrainingGroup> parse_groups_text(const std::string& text,
                                                    const std::string& origin = "<groups>") {
  std::vector<TrainingGroup> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::blank(line)) continue;
    const auto where = detail::location(origin, lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorKind::parse, where + ": " + e.what());
    }
    out.push_back(group_from_json(j, where));
  }
  return out;
}

inline std::vector<TrainingGroup> parse_groups_jsonl(const std::string& path) {
  return parse_groups_text(read_file(path), path);
}

inline std::string format_groups(const std::vector<TrainingGroup>& groups) {
  std::string out;
  for (const auto& g : groups) {
    out += group_to_json(g).dump();
    out += '\n';
  }
  return out;
}

inline void write_groups_jsonl(const std::vector<TrainingGroup>& groups, const std::string& path) {
  write_text_file(path, format_groups(groups));
}

// ---------------------------------------------------------------------------
// Qrels

inline Qrels parse_qrels_text(const std::string& text, const std::string& origin = "<qrels>") {
  Qrels q;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::blank(line)) continue;
    const auto cols = detail::split_ws(line);
    const auto where = detail::location(origin, lineno);
    require(cols.size() == 4, ErrorKind::parse, where + ": expected 4 columns");
    auto grade = parse_int(cols[3]);
    require(grade.has_value(), ErrorKind::parse, where + ": non-integer grade");
    require(*grade >= 0, ErrorKind::validation, where + ": negative grade");
    q.set(QueryId(std::string(cols[0])), DocId(std::string(cols[2])), static_cast<int>(*grade));
  }
  return q;
}

inline Qrels parse_qrels(const std::string& path) { return parse_qrels_text(read_file(path), path); }

inline std::string format_qrels(const Qrels& qrels) {
  std::string out;
  for (const auto& [q, docs] : qrels.all())
    for (const auto& [d, grade] : docs) out += q.str() + "\t0\t" + d.str() + "\t" + std::to_string(grade) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Two-column id<TAB>text files (corpus, queries)

inline std::vector<std::pair<std::string, std::string>> parse_text_table(const std::string& path) {
  const auto text = read_file(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::blank(line)) continue;
    const auto tab = line.find('\t');
    require(tab != std::string::npos, ErrorKind::parse,
            detail::location(path, lineno) + ": expected id<TAB>text");
    auto id = line.substr(0, tab);
    require(Id<DocTag>::valid(id), ErrorKind::parse, detail::location(path, lineno) + ": invalid id");
    out.emplace_back(std::move(id), line.substr(tab + 1));
  }
  return out;
}

inline std::string format_text_table(const std::vector<std::pair<std::string, std::string>>& rows) {
  std::string out;
  for (const auto& [id, text] : rows) {
    require(text.find_first_of("\t\n") == std::string::npos, ErrorKind::validation,
            "text for '" + id + "' contains a tab or newline");
    out += id + "\t" + text + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Embeddings

inline EmbeddingTable parse_embeddings(const std::string& path) {
  const auto text = read_file(path);
  EmbeddingTable table;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (detail::blank(line)) continue;
    const auto where = detail::location(path, lineno);
    const auto tab = line.find('\t');
    require(tab != std::string::npos, ErrorKind::parse, where + ": expected id<TAB>values");
    const auto id = line.substr(0, tab);
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    EmbeddingVector v;
    while (true) {
      const auto comma = rest.find(',');
      auto tok = rest.substr(0, comma);
      auto x = parse_double(tok);
      require(x.has_value(), ErrorKind::parse, where + ": bad value '" + std::string(tok) + "'");
      v.push_back(*x);
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    try {
      table.insert(id, std::move(v));
    } catch (const Error& e) {
      fail(ErrorKind::validation, where + ": " + e.what());
    }
  }
  return table;
}

inline std::string format_embeddings(const EmbeddingTable& table) {
  std::string out;
  for (const auto& id : table.ids()) {
    out += id;
    out += '\t';
    const auto& v = table.at(id);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) out += ',';
      out += format_exact(v[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace rankdistill
