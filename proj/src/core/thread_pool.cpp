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
#include "impactreg/core/thread_pool.hpp"

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "impactreg/core/types.hpp"

namespace impactreg {

ThreadPool::ThreadPool(int threads) : threads_(threads) {
  if (threads < 1) throw ConfigError("thread count must be positive");
}

void ThreadPool::for_items(std::size_t n, const std::function<void(std::size_t)>& fn) const {
  const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads_), n);
  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  workers.reserve(t);
  for (std::size_t w = 0; w < t; ++w) {
    workers.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < n; i += t) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : workers) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace impactreg
