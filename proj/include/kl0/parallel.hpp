#pragma once

#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace kl0 {

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// out[i] = fn(i) for i < n. Work is handed out by an atomic counter, but
// results land at their own index, so the output never depends on
// scheduling. The first exception thrown by fn is rethrown.
template <class T, class Fn>
std::vector<T> parallel_map(size_t n, int workers, Fn&& fn) {
  std::vector<T> out(n);
  workers = std::max(1, std::min<int>(resolve_workers(workers), static_cast<int>(n)));
  if (workers <= 1) {
    for (size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto run = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        out[i] = fn(i);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

}  // namespace kl0
