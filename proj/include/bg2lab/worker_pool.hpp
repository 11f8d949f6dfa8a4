#ifndef BG2LAB_WORKER_POOL_HPP
#define BG2LAB_WORKER_POOL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace bg2lab {

/// Runs fn(i) for i in [0, count) on `workers` threads and returns the
/// results indexed by i.  Each task owns its state (RNG stream, observers),
/// so scheduling order cannot change any result; callers reduce the returned
/// vector in index order, which makes every report independent of the worker
/// count.
template <typename T>
std::vector<T> run_indexed(std::size_t count, int workers,
                           const std::function<T(std::size_t)>& fn) {
  std::vector<T> results(count);
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error = nullptr;
  const std::size_t k = std::min(static_cast<std::size_t>(workers), count);
  std::vector<std::thread> threads;
  threads.reserve(k);
  for (std::size_t w = 0; w < k; ++w) {
    threads.emplace_back([&]() {
      while (!failed.load(std::memory_order_relaxed)) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) break;
        try {
          results[i] = fn(i);
        } catch (...) {
          if (!failed.exchange(true)) first_error = std::current_exception();
          break;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

inline int default_workers() {
  if (const char* env = std::getenv("BG2LAB_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  return 1;
}

}  // namespace bg2lab

#endif
