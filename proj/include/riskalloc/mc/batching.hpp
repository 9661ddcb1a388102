#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace riskalloc::mc {

inline constexpr std::size_t kDefaultBatches = 50;

struct BatchRange {
  std::size_t begin;
  std::size_t end;
};

/// n_batches contiguous equal blocks covering the first
/// n_rows - n_rows % n_batches rows; the remainder is left out.
std::vector<BatchRange> batch_ranges(std::size_t n_rows, std::size_t n_batches);

/// Mean and batch-means standard error of per-batch statistics.
struct BatchSummary {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// std_error = sample standard deviation / sqrt(count). NaN std_error for fewer
/// than two values.
BatchSummary summarize_batches(std::span<const double> values);

/// Worker count for parallel loops; at least 1.
std::size_t worker_count();

/// Calls body(k) for every k in [0, n). Work is split into contiguous
/// chunks across worker threads; callers write into disjoint preallocated
/// slots so results do not depend on scheduling. The first exception thrown
/// by any body is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (std::size_t k = 0; k < n; ++k) body(k);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = n * w / workers;
    const std::size_t end = n * (w + 1) / workers;
    threads.emplace_back([&, begin, end] {
      try {
        for (std::size_t k = begin; k < end; ++k) body(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace riskalloc::mc
