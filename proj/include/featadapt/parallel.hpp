#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace featadapt {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Each index is
// visited exactly once; callers write results by index so output order never
// depends on scheduling. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn fn) {
  const std::size_t width = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
  if (width <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(width);
  for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace featadapt
