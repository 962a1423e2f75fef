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
#include "impactreg/features/extractor.hpp"

#include <cstring>

namespace impactreg {

IdentityExtractor::IdentityExtractor(int channels) : channels_(channels) {
  if (channels < 1) throw ConfigError("identity extractor needs at least one channel");
}

void IdentityExtractor::extract(const double* patch, const Index3& patch_size,
                                double* features) const {
  const std::size_t n = patch_size.volume() * static_cast<std::size_t>(channels_);
  std::memcpy(features, patch, n * sizeof(double));
}

void IdentityExtractor::extract_grad(const double* patch, const Index3& patch_size,
                                     double* features, double* dfeat_dpatch) const {
  const std::size_t n = patch_size.volume() * static_cast<std::size_t>(channels_);
  std::memcpy(features, patch, n * sizeof(double));
  std::memset(dfeat_dpatch, 0, n * n * sizeof(double));
  for (std::size_t i = 0; i < n; ++i) dfeat_dpatch[i * n + i] = 1.0;
}

}  // namespace impactreg
