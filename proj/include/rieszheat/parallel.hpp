#ifndef RIESZHEAT_PARALLEL_HPP
#define RIESZHEAT_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace rieszheat {

/// Worker count: RIESZHEAT_THREADS if set and positive, else hardware concurrency.
int default_worker_count();

/// Evaluates fn(i) for i in [0, count) on `workers` threads and returns the
/// results in index order, so the output never depends on scheduling. The
/// first exception thrown by any task is rethrown after all workers join.
template <class R, class Fn>
std::vector<R> parallel_map(std::size_t count, int workers, Fn&& fn) {
  std::vector<R> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Pairwise (cascade) summation; result depends only on the input order.
double pairwise_sum(std::span<const double> values);

}  // namespace rieszheat

#endif  // RIESZHEAT_PARALLEL_HPP
