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
#ifndef IMPACTREG_IO_TEXT_FORMAT_HPP
#define IMPACTREG_IO_TEXT_FORMAT_HPP

#include <cstdio>
#include <string>

namespace impactreg {

/**
 * Decimal form with 17 significant digits ("%.17g"), enough for the value to
 * parse back to exactly the same double; used by every text writer so
 * serialized numbers round-trip bit-for-bit and reports are
 * byte-reproducible.
 */
inline std::string format_g17(double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf, buf + n);
}

}  // namespace impactreg

#endif  // IMPACTREG_IO_TEXT_FORMAT_HPP
