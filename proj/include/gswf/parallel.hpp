#pragma once

// Minimal work-sharing loop. Each index is handled exactly once and results are
// written by index, so output never depends on the schedule.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gswf {

// Process-wide default used when a caller passes threads = 0.
inline int& default_threads() {
  static int n = 1;
  return n;
}

template <class F>
void parallel_for(std::size_t count, int threads, F&& body) {
  if (threads <= 0) threads = default_threads();
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::min<std::size_t>(count, 256))));
  if (threads == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace gswf
