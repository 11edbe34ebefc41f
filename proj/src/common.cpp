#include "gge/common.hpp"

#include <atomic>
#include <mutex>

namespace gge {

int& thread_count() {
  static int n = default_threads();
  return n;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body) {
  if (n <= 0) return;
  int workers = std::min<std::int64_t>(thread_count(), n);
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::int64_t> next(0);
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  auto run = [&]() {
    try {
      // Chunked self-scheduling keeps threads busy when per-item cost varies.
      std::int64_t chunk = std::max<std::int64_t>(1, n / (8 * workers));
      for (;;) {
        std::int64_t lo = next.fetch_add(chunk);
        if (lo >= n) return;
        std::int64_t hi = std::min(n, lo + chunk);
        for (std::int64_t i = lo; i < hi; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!err) err = std::current_exception();
    }
  };
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace gge
