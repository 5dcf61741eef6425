#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace bhp {

/// Runs f(0..n-1) on up to `threads` workers and returns the results in
/// replicate order. Output does not depend on the thread count as long as
/// f(i) depends only on i. The first exception thrown by any task is
/// rethrown after all workers stop.
template <class F>
auto run_replicates(std::size_t n, int threads, F&& f) -> std::vector<std::invoke_result_t<F&, std::size_t>> {
  using R = std::invoke_result_t<F&, std::size_t>;
  static_assert(!std::is_same_v<R, bool>, "vector<bool> is not safe for concurrent writes");
  std::vector<R> out(n);
  const std::size_t workers = std::clamp<std::size_t>(threads <= 0 ? 1 : static_cast<std::size_t>(threads), 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        out[i] = f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace bhp
