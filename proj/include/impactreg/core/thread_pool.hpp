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
#ifndef IMPACTREG_CORE_THREAD_POOL_HPP
#define IMPACTREG_CORE_THREAD_POOL_HPP

#include <cstddef>
#include <functional>

namespace impactreg {

/**
 * Static round-robin work distribution: item i runs on worker i % T.  The
 * assignment depends only on the item index, never on timing, so any code
 * that writes to per-item slots gets thread-count-independent results.
 * A size of 1 (or fewer items than workers would need) runs inline.
 */
class ThreadPool {
 public:
  explicit ThreadPool(int threads = 1);

  int size() const { return threads_; }

  /** Runs fn(0..n-1); exceptions from workers are rethrown on the caller. */
  void for_items(std::size_t n, const std::function<void(std::size_t)>& fn) const;

 private:
  int threads_;
};

}  // namespace impactreg

#endif  // IMPACTREG_CORE_THREAD_POOL_HPP
