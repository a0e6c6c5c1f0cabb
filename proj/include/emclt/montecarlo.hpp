#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace emclt {

/// Thread cap: the explicit request if given, else EMCLT_THREADS, else the
/// hardware concurrency (at least 1).
std::size_t resolve_threads(std::optional<std::size_t> requested = std::nullopt);

/// out[i] = f(i) for i < count, evaluated by up to `threads` workers. Results
/// are stored by index, so the output does not depend on scheduling. The
/// exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t count, std::size_t threads, F&& f) {
  using T = decltype(f(std::size_t{0}));
  std::vector<T> out(count);
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::atomic<std::size_t> next{0};
  std::mutex guard;
  std::exception_ptr error;
  std::size_t error_index = count;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      {
        std::lock_guard lock(guard);
        if (error && error_index < i) return;
      }
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(guard);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace emclt
