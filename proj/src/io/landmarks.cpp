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
#include "impactreg/io/landmarks.hpp"

#include <fstream>
#include <sstream>

#include "impactreg/io/text_format.hpp"

namespace impactreg {

std::vector<Vec3> parse_landmarks_text(const std::string& text) {
  std::vector<Vec3> points;
  std::istringstream lines(text);
  std::string line;
  for (int number = 1; std::getline(lines, line); ++number) {
    if (const std::size_t hash = line.find('#'); hash != std::string::npos)
      line.resize(hash);
    std::istringstream fields(line);
    Vec3 p;
    if (!(fields >> p.x)) {
      std::string stray;
      if (fields.clear(), fields >> stray)
        throw IoError("landmarks line " + std::to_string(number) + ": expected 3 numbers");
      continue;  // blank or comment-only line
    }
    if (!(fields >> p.y >> p.z))
      throw IoError("landmarks line " + std::to_string(number) + ": expected 3 numbers");
    std::string extra;
    if (fields >> extra)
      throw IoError("landmarks line " + std::to_string(number) +
                    ": trailing content '" + extra + "' after 3 numbers");
    points.push_back(p);
  }
  return points;
}

std::vector<Vec3> read_landmarks(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_landmarks_text(ss.str());
  } catch (const IoError& e) {
    throw IoError("'" + path + "': " + e.what());
  }
}

std::string serialize_landmarks(std::span<const Vec3> points) {
  std::string out;
  for (const Vec3& p : points) {
    out += format_g17(p.x);
    out += ' ';
    out += format_g17(p.y);
    out += ' ';
    out += format_g17(p.z);
    out += '\n';
  }
  return out;
}

void write_landmarks(const std::string& path, std::span<const Vec3> points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << serialize_landmarks(points);
  if (!out) throw IoError("failed writing landmarks to '" + path + "'");
}

}  // namespace impactreg
