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
#ifndef IMPACTREG_IO_LANDMARKS_HPP
#define IMPACTREG_IO_LANDMARKS_HPP

#include <span>
#include <string>
#include <vector>

#include "impactreg/core/types.hpp"

namespace impactreg {

/**
 * Landmark files are plain text: one point per line as "x y z" in
 * millimetres (world coordinates), whitespace separated.  '#' starts a
 * comment that runs to the end of the line; blank lines are skipped.  Point
 * order is preserved.  A malformed line raises IoError naming its 1-based
 * line number.
 */
std::vector<Vec3> parse_landmarks_text(const std::string& text);
std::vector<Vec3> read_landmarks(const std::string& path);

/** One "x y z" line per point, full double precision. */
std::string serialize_landmarks(std::span<const Vec3> points);
void write_landmarks(const std::string& path, std::span<const Vec3> points);

}  // namespace impactreg

#endif  // IMPACTREG_IO_LANDMARKS_HPP
