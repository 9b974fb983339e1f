#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lfdepth {

// 0 restores the OpenMP default.
void set_num_threads(int threads);
int num_threads();

// Runs fn(i) for i in [0, n). Iterations must be independent; the first
// exception thrown by any iteration is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::ptrdiff_t n, Fn&& fn) {
  std::exception_ptr error;
  std::mutex error_mutex;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

// Sum with a fixed blocking that does not depend on the thread count, so
// floating-point results are identical for any number of threads.
template <class Fn>
double deterministic_sum(std::ptrdiff_t n, Fn&& term) {
  constexpr std::ptrdiff_t kBlock = 4096;
  const std::ptrdiff_t blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> partial(static_cast<std::size_t>(blocks), 0.0);
  parallel_for(blocks, [&](std::ptrdiff_t b) {
    double acc = 0.0;
    const std::ptrdiff_t end = std::min(n, (b + 1) * kBlock);
    for (std::ptrdiff_t i = b * kBlock; i < end; ++i) acc += term(i);
    partial[static_cast<std::size_t>(b)] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace lfdepth
