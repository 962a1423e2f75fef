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
#ifndef IMPACTREG_IO_PARAMETER_FILE_HPP
#define IMPACTREG_IO_PARAMETER_FILE_HPP

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "impactreg/core/types.hpp"

namespace impactreg {

/**
 * Ordered key -> values map in the classic registration parameter-file
 * style: one `(Key value value ...)` group per entry, string values quoted,
 * numbers bare, `//` comments.  Setting an existing key replaces its values
 * in place (a key parsed twice keeps the last occurrence at the position of
 * the first).
 *
 * Typed getters mark their key as consumed; unused_keys() then lists entries
 * nothing asked for, which callers surface as unknown-parameter warnings
 * while still preserving the entries on rewrite.
 */
class ParameterMap {
 public:
  using Values = std::vector<std::string>;

  bool has(const std::string& key) const;
  /** Raw values, or nullptr when absent.  Does not mark the key consumed. */
  const Values* find(const std::string& key) const;
  void set(const std::string& key, Values values);
  void erase(const std::string& key);

  const std::vector<std::pair<std::string, Values>>& entries() const { return entries_; }

  /**
   * Scalar getters return `fallback` when the key is absent and throw
   * ConfigError when the entry has more than one value or the value does not
   * parse as the requested type.  Booleans are spelled "true" / "false".
   */
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  /** List getters return an empty vector when the key is absent. */
  std::vector<std::string> get_strings(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

  void mark_used(const std::string& key) const;
  /** Keys never consumed by a getter or mark_used, in entry order. */
  std::vector<std::string> unused_keys() const;

 private:
  std::vector<std::pair<std::string, Values>> entries_;
  mutable std::set<std::string> used_;
};

/** Parses parameter-file text; IoError on malformed syntax. */
ParameterMap parse_parameter_text(const std::string& text);
ParameterMap read_parameter_file(const std::string& path);

/**
 * One `(Key ...)` group per line in entry order; values are quoted unless
 * they parse fully as a number, so round-trips preserve types.
 */
std::string serialize_parameter_map(const ParameterMap& map);
void write_parameter_file(const std::string& path, const ParameterMap& map);

}  // namespace impactreg

#endif  // IMPACTREG_IO_PARAMETER_FILE_HPP
