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
#include <algorithm>

#include "impactreg/similarity/metric.hpp"

namespace impactreg {

void reduce_blocks(const ThreadPool& pool, std::size_t items, std::size_t state_size,
                   const std::function<void(std::size_t, std::size_t, double*)>& block_fn,
                   std::vector<double>& folded) {
  folded.assign(state_size, 0.0);
  if (items == 0) return;
  const std::size_t blocks = (items + kReduceBlockSize - 1) / kReduceBlockSize;
  std::vector<double> states(blocks * state_size, 0.0);
  pool.for_items(blocks, [&](std::size_t b) {
    const std::size_t begin = b * kReduceBlockSize;
    const std::size_t end = std::min(items, begin + kReduceBlockSize);
    block_fn(begin, end, states.data() + b * state_size);
  });
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* state = states.data() + b * state_size;
    for (std::size_t k = 0; k < state_size; ++k) folded[k] += state[k];
  }
}

}  // namespace impactreg
