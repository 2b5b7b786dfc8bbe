#ifndef SIGPATH_PARALLEL_HPP
#define SIGPATH_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sigpath {

// Runs fn(i) for i in [0, n) on up to hardware_concurrency threads, in contiguous chunks.
// fn must only write state owned by index i; callers reduce afterwards in index order,
// which keeps results independent of scheduling. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, std::size_t max_threads = 0) {
  std::size_t threads = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace sigpath

#endif
