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
#ifndef IMPACTREG_SIMILARITY_DISTANCE_HPP
#define IMPACTREG_SIMILARITY_DISTANCE_HPP

#include <cstddef>
#include <string>

#include "impactreg/core/types.hpp"

namespace impactreg {

/**
 * Per-sample feature distances.  All are dissimilarities (0 = identical up
 * to the measure's invariances) and are means over the compared channels,
 * so values are comparable across channel counts.
 */
enum class DistanceKind { l1, l2, ncc, cosine };

DistanceKind parse_distance(const std::string& name);
const char* distance_name(DistanceKind k);

/**
 * Evaluates D(f, m) over n channels and optionally d D / d m into dm.
 * Returns the value.  `guarded` (optional) is incremented when an epsilon
 * guard on a denominator fired (NCC/cosine on near-constant input; the
 * gradient is zeroed in that case).  The L1 derivative uses a smoothed sign
 * with width 1e-6 times the feature scale.
 */
double distance_eval(DistanceKind kind, const double* f, const double* m, std::size_t n,
                     double* dm, std::size_t* guarded);

}  // namespace impactreg

#endif  // IMPACTREG_SIMILARITY_DISTANCE_HPP
