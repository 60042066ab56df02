#ifndef FRT_PARALLEL_HPP
#define FRT_PARALLEL_HPP

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace frt {

// Runs fn(i) for i in [0, n). threads <= 1 runs serially; otherwise items
// are striped across workers. Each item must touch only its own outputs,
// so results match the serial order exactly.
inline void parallel_for(int64_t n, int threads, const std::function<void(int64_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = int(std::min<int64_t>(threads, n));
  std::vector<std::thread> pool;
  pool.reserve(size_t(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&, t] {
      for (int64_t i = t; i < n; i += workers) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace frt

#endif  // FRT_PARALLEL_HPP
