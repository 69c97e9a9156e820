#ifndef COLABEL_PARALLEL_HPP
#define COLABEL_PARALLEL_HPP

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace colabel {

/// Worker count: COLABEL_THREADS if set to a positive integer, otherwise the
/// hardware concurrency.
inline int worker_count() {
  if (const char* env = std::getenv("COLABEL_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for i in [0, n). Each index runs exactly once; results must
/// not depend on which worker ran it.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
  const long workers = std::min<long>(worker_count(), n);
  if (workers <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (long w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (long i = w; i < n; i += workers) fn(i);
    });
}

}  // namespace colabel

#endif  // COLABEL_PARALLEL_HPP
