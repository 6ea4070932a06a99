#pragma once

#include <cstddef>
#include <exception>
#include <vector>

namespace twophase {

/// How many OpenMP workers a kernel may use. workers <= 1 runs the plain
/// serial loop, which is the reference the parallel path is tested against.
struct Execution {
  int workers = 1;

  bool parallel() const noexcept { return workers > 1; }
  static Execution serial() noexcept { return {1}; }
};

/// Calls f(i) for i in [0, n). Work items must write only to their own slot.
/// If any item throws, the exception of the lowest index is rethrown.
template <class F>
void for_each_index(std::size_t n, Execution ex, F&& f) {
  if (!ex.parallel() || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for num_threads(ex.workers) schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Collects f(i) for i in [0, n) in index order.
template <class T, class F>
std::vector<T> map_indices(std::size_t n, Execution ex, F&& f) {
  std::vector<T> out(n);
  for_each_index(n, ex, [&](std::size_t i) { out[i] = f(i); });
  return out;
}

}  // namespace twophase
