// Minimal fork-join loop over an index range.
#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace toruslab {

/// Number of worker threads for a requested cap (0 = hardware concurrency).
inline int resolve_tasks(int tasks) {
  if (tasks > 0) return tasks;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, count) on up to `tasks` threads. Indices are handed out
/// dynamically, so fn must only write to per-index state. The first exception is rethrown.
template <class Fn>
void parallel_for(long count, int tasks, Fn&& fn) {
  const int workers = static_cast<int>(std::min<long>(resolve_tasks(tasks), std::max(1L, count)));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (long i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace toruslab
