#pragma once

#include <cstddef>
#include <exception>
#include <limits>

namespace otfs {

/// Sets the worker count for parallel loops; 0 keeps the OpenMP default.
void set_thread_count(int threads);
int thread_count();

/// Runs fn(0) ... fn(n - 1) on the OpenMP team. Exceptions cannot cross the
/// parallel region, so they are caught per index and the one from the lowest
/// index is rethrown afterwards.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr error;
  std::size_t error_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical(otfs_parallel_for_error)
      {
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace otfs
