/*=========================================================================
 *
 *  Copyright the impactreg contributors
 *
 *  Licensed under the Apache License, Version 2.0 (the "License");
 *  you may not use this file except in compliance with the License.
 *  You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0.txt
 *
 *  Unless required by applicable law or agreed to in writing, software
 *  distributed under the License is distributed on an "AS IS" BASIS,
 *  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *  See the License for the specific language governing permissions and
 *  limitations under the License.
 *
 *=========================================================================*/
#include "impactreg/io/parameter_file.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace impactreg {

namespace {

bool parses_as_number(const std::string& s) {
  if (s.empty()) return false;
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  return ec == std::errc() && ptr == end;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* expected) {
  throw ConfigError("parameter '" + key + "': value '" + value + "' is not " + expected);
}

double to_double(const std::string& key, const std::string& s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, s, "a number");
  return v;
}

int to_int(const std::string& key, const std::string& s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, s, "an integer");
  return v;
}

}  // namespace

bool ParameterMap::has(const std::string& key) const { return find(key) != nullptr; }

const ParameterMap::Values* ParameterMap::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

void ParameterMap::set(const std::string& key, Values values) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(values);
      return;
    }
  }
  entries_.emplace_back(key, std::move(values));
}

void ParameterMap::erase(const std::string& key) {
  for (auto it = entries_.begin(); it != entries_.end(); ++it) {
    if (it->first == key) {
      entries_.erase(it);
      return;
    }
  }
}

namespace {

const std::string& single_value(const ParameterMap& map, const std::string& key,
                                const ParameterMap::Values& values) {
  (void)map;
  if (values.size() != 1)
    throw ConfigError("parameter '" + key + "' expects a single value, got " +
                      std::to_string(values.size()));
  return values.front();
}

}  // namespace

std::string ParameterMap::get_string(const std::string& key, const std::string& fallback) const {
  mark_used(key);
  const Values* v = find(key);
  return v ? single_value(*this, key, *v) : fallback;
}

double ParameterMap::get_double(const std::string& key, double fallback) const {
  mark_used(key);
  const Values* v = find(key);
  return v ? to_double(key, single_value(*this, key, *v)) : fallback;
}

int ParameterMap::get_int(const std::string& key, int fallback) const {
  mark_used(key);
  const Values* v = find(key);
  return v ? to_int(key, single_value(*this, key, *v)) : fallback;
}

std::uint64_t ParameterMap::get_u64(const std::string& key, std::uint64_t fallback) const {
  mark_used(key);
  const Values* v = find(key);
  if (!v) return fallback;
  const std::string& s = single_value(*this, key, *v);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size())
    bad_value(key, s, "an unsigned integer");
  return out;
}

bool ParameterMap::get_bool(const std::string& key, bool fallback) const {
  mark_used(key);
  const Values* v = find(key);
  if (!v) return fallback;
  const std::string& s = single_value(*this, key, *v);
  if (s == "true") return true;
  if (s == "false") return false;
  bad_value(key, s, "'true' or 'false'");
}

std::vector<std::string> ParameterMap::get_strings(const std::string& key) const {
  mark_used(key);
  const Values* v = find(key);
  return v ? *v : Values{};
}

std::vector<double> ParameterMap::get_doubles(const std::string& key) const {
  mark_used(key);
  const Values* v = find(key);
  std::vector<double> out;
  if (!v) return out;
  out.reserve(v->size());
  for (const std::string& s : *v) out.push_back(to_double(key, s));
  return out;
}

std::vector<int> ParameterMap::get_ints(const std::string& key) const {
  mark_used(key);
  const Values* v = find(key);
  std::vector<int> out;
  if (!v) return out;
  out.reserve(v->size());
  for (const std::string& s : *v) out.push_back(to_int(key, s));
  return out;
}

void ParameterMap::mark_used(const std::string& key) const { used_.insert(key); }

std::vector<std::string> ParameterMap::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

ParameterMap parse_parameter_text(const std::string& text) {
  ParameterMap map;
  std::size_t i = 0;
  const std::size_t n = text.size();
  int line = 1;

  auto fail = [&](const std::string& what) -> void {
    throw IoError("parameter file, line " + std::to_string(line) + ": " + what);
  };
  auto advance = [&]() {
    if (text[i] == '\n') ++line;
    ++i;
  };
  auto skip_space_and_comments = [&]() {
    while (i < n) {
      if (std::isspace(static_cast<unsigned char>(text[i]))) {
        advance();
      } else if (text[i] == '/' && i + 1 < n && text[i + 1] == '/') {
        while (i < n && text[i] != '\n') ++i;
      } else {
        break;
      }
    }
  };

  while (true) {
    skip_space_and_comments();
    if (i >= n) break;
    if (text[i] != '(') fail(std::string("expected '(', found '") + text[i] + "'");
    const int open_line = line;
    advance();
    skip_space_and_comments();

    std::string key;
    while (i < n && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
      key.push_back(text[i]), advance();
    if (key.empty()) fail("expected a parameter name after '('");
    if (std::isdigit(static_cast<unsigned char>(key.front())))
      fail("parameter name '" + key + "' must not start with a digit");

    ParameterMap::Values values;
    while (true) {
      skip_space_and_comments();
      if (i >= n) {
        line = open_line;
        fail("unterminated '(" + key + " ...' group");
      }
      if (text[i] == ')') {
        advance();
        break;
      }
      if (text[i] == '"') {
        advance();
        std::string v;
        while (i < n && text[i] != '"') {
          if (text[i] == '\n') fail("newline inside a quoted value of '" + key + "'");
          v.push_back(text[i]);
          advance();
        }
        if (i >= n) fail("unterminated quoted value of '" + key + "'");
        advance();  // closing quote
        values.push_back(std::move(v));
      } else {
        std::string v;
        while (i < n && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != ')' &&
               text[i] != '"')
          v.push_back(text[i]), advance();
        values.push_back(std::move(v));
      }
    }
    map.set(key, std::move(values));
  }
  return map;
}

ParameterMap read_parameter_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open parameter file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_parameter_text(buf.str());
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

std::string serialize_parameter_map(const ParameterMap& map) {
  std::string out;
  for (const auto& [key, values] : map.entries()) {
    out += '(';
    out += key;
    for (const std::string& v : values) {
      out += ' ';
      if (parses_as_number(v)) {
        out += v;
      } else {
        out += '"';
        out += v;
        out += '"';
      }
    }
    out += ")\n";
  }
  return out;
}

void write_parameter_file(const std::string& path, const ParameterMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize_parameter_map(map);
  if (!out) throw IoError("failed writing parameter file '" + path + "'");
}

}  // namespace impactreg
