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

// Flat key=value run configuration. A "[name]" line prefixes the keys that
// follow with "name.", '#' starts a comment, later assignments win.

#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rankdistill/core.hpp"
#include "rankdistill/io.hpp"

namespace rankdistill {

class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>") {
    Config c;
    std::string section, line;
    std::istringstream in(text);
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      const auto s = trim(line);
      if (s.empty()) continue;
      const auto where = detail::location(origin, lineno);
      if (s.front() != '[') {
        c.assign(s, section, where);
        continue;
      }
      require(s.back() == ']' && s.size() > 2, ErrorKind::config, where + ": malformed section header");
      section = std::string(trim(s.substr(1, s.size() - 2)));
      require(valid_key(section), ErrorKind::config, where + ": bad section name '" + section + "'");
    }
    return c;
  }

  static Config load(const std::string& path) { return parse(read_file(path), path); }

  /// Applies one "key=value" override (as given to --set).
  void set(std::string_view assignment) { assign(trim(assignment), "", "--set '" + std::string(assignment) + "'"); }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    const auto* v = lookup(key);
    return v ? *v : fallback;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto* raw = lookup(key);
    if (!raw) return fallback;
    const auto v = parse_double(*raw);
    require(v.has_value(), ErrorKind::config, key + ": expected a number, got '" + *raw + "'");
    return *v;
  }

  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const {
    const auto* raw = lookup(key);
    if (!raw) return fallback;
    const auto v = parse_int(*raw);
    require(v.has_value() && *v >= 0, ErrorKind::config, key + ": expected a non-negative integer, got '" + *raw + "'");
    return static_cast<std::uint64_t>(*v);
  }

  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(get_uint(key, fallback));
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto* raw = lookup(key);
    if (!raw) return fallback;
    if (*raw == "true" || *raw == "1" || *raw == "yes") return true;
    if (*raw == "false" || *raw == "0" || *raw == "no") return false;
    fail(ErrorKind::config, key + ": expected true or false, got '" + *raw + "'");
  }

  /// Comma-separated list; an empty value gives an empty list.
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback) const {
    const auto* raw = lookup(key);
    if (!raw) return fallback;
    std::vector<std::string> out;
    const std::string_view v = *raw;
    std::size_t start = 0;
    while (start <= v.size()) {
      auto comma = v.find(',', start);
      if (comma == std::string_view::npos) comma = v.size();
      const auto item = trim(v.substr(start, comma - start));
      if (!item.empty()) out.emplace_back(item);
      start = comma + 1;
    }
    return out;
  }

  /// Keys present but never read. Call after every consumer has run.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  void reject_unknown() const {
    const auto extra = unused();
    if (extra.empty()) return;
    std::string msg = "unknown config key";
    msg += extra.size() > 1 ? "s: " : ": ";
    for (std::size_t i = 0; i < extra.size(); ++i) msg += (i ? ", " : "") + extra[i];
    fail(ErrorKind::config, msg);
  }

  /// Sorted "key=value" lines restricted to keys starting with `prefix`.
  std::string canonical(std::string_view prefix = {}) const {
    std::string out;
    for (const auto& [k, v] : values_)
      if (k.compare(0, prefix.size(), prefix) == 0) out += k + "=" + v + "\n";
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  // Marks the key as read whether or not it is present.
  const std::string* lookup(const std::string& key) const {
    used_.insert(key);
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }

  static std::string_view trim(std::string_view s) {
    const auto ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    return s.substr(b, s.find_last_not_of(ws) - b + 1);
  }

  static bool valid_key(std::string_view k) {
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (char ch : k)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.')) return false;
    return true;
  }

  void assign(std::string_view s, const std::string& section, const std::string& where) {
    const auto eq = s.find('=');
    require(eq != std::string_view::npos, ErrorKind::config, where + ": expected key=value");
    const auto key = trim(s.substr(0, eq));
    require(valid_key(key), ErrorKind::config, where + ": bad key '" + std::string(key) + "'");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    values_[full] = std::string(trim(s.substr(eq + 1)));
  }

  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
};

}  // namespace rankdistill
