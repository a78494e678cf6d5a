// Copyright (c) 2026 satstereo contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SATSTEREO_PARALLEL_HPP_
#define SATSTEREO_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace satstereo {

/// Global worker cap. 0 means hardware concurrency. Settable via the
/// SATSTEREO_THREADS environment variable or set_max_threads().
inline int& max_threads_ref() {
  static int value = [] {
    if (const char* env = std::getenv("SATSTEREO_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
    return 0;
  }();
  return value;
}

inline void set_max_threads(int n) { max_threads_ref() = n; }

inline int effective_threads() {
  const int cap = max_threads_ref();
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  return cap > 0 ? std::min(cap, hw) : hw;
}

/// Runs fn(i) for i in [begin, end) on worker threads. Work items must write
/// to disjoint outputs; item order within a worker is ascending, so results
/// are identical for any thread count.
template <typename Fn>
void parallel_for(std::int64_t begin, std::int64_t end, const Fn& fn) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  const int threads =
      static_cast<int>(std::min<std::int64_t>(effective_threads(), count));
  if (threads <= 1) {
    for (std::int64_t i = begin; i < end; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next(begin);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= end) break;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace satstereo

#endif  // SATSTEREO_PARALLEL_HPP_
