#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace optfair {

// Runs fn(i) for i in [0, n) across up to `workers` threads. Work is split
// into contiguous index blocks; results must be written to per-index slots so
// output is identical for any worker count.
inline void parallel_for(long n, int workers, const std::function<void(long)>& fn) {
  if (n <= 0) return;
  workers = static_cast<int>(std::max<long>(1, std::min<long>(workers, n)));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> threads;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const long chunk = (n + workers - 1) / workers;
  for (int t = 0; t < workers; ++t) {
    const long begin = t * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back([&, begin, end]() {
      try {
        for (long i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : threads) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace optfair
