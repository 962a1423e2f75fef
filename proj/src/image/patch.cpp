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
#include "impactreg/image/patch.hpp"

namespace impactreg {

void PatchSpec::validate() const {
  if (size.x < 1 || size.y < 1 || size.z < 1)
    throw ConfigError("patch size must be positive along every axis");
  if (!(resolution.x > 0.0) || !(resolution.y > 0.0) || !(resolution.z > 0.0))
    throw ConfigError("patch resolution must be positive along every axis");
}

bool resample_patch(const CoefficientVolume& cv, const Vec3& center, const PatchSpec& spec,
                    double* values) {
  const int nc = cv.channels();
  double* out = values;
  for (int k = 0; k < spec.size.z; ++k)
    for (int j = 0; j < spec.size.y; ++j)
      for (int i = 0; i < spec.size.x; ++i) {
        if (!cv.sample(center + spec.node_offset(i, j, k), out)) return false;
        out += nc;
      }
  return true;
}

bool resample_patch_grad(const CoefficientVolume& cv, const Vec3& center, const PatchSpec& spec,
                         double* values, double* grads) {
  const int nc = cv.channels();
  double* out = values;
  double* gout = grads;
  for (int k = 0; k < spec.size.z; ++k)
    for (int j = 0; j < spec.size.y; ++j)
      for (int i = 0; i < spec.size.x; ++i) {
        if (!cv.sample_grad(center + spec.node_offset(i, j, k), out, gout)) return false;
        out += nc;
        gout += 3 * nc;
      }
  return true;
}

}  // namespace impactreg
