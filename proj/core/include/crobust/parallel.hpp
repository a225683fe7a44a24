#pragma once

#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace crobust {

// Runs fn(i) for i in [0, n) across `threads` workers on contiguous chunks.
// Each index must write only its own output slot, which makes the result
// identical to the sequential run by construction. The first exception is
// rethrown on the calling thread.
template <typename Fn>
void parallel_for(int64_t n, int threads, Fn&& fn) {
  if (n <= 0) return;
  if (threads < 1) threads = 1;
  const int workers = static_cast<int>(std::min<int64_t>(threads, n));
  if (workers == 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  const int64_t chunk = (n + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const int64_t begin = w * chunk;
    const int64_t end = std::min(n, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace crobust
