#include "riskalloc/mc/batching.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "riskalloc/errors.hpp"

namespace riskalloc::mc {

std::vector<BatchRange> batch_ranges(std::size_t n_rows, std::size_t n_batches) {
  if (n_batches == 0) throw DomainError("number of batches must be positive");
  const std::size_t per_batch = n_rows / n_batches;
  std::vector<BatchRange> out;
  if (per_batch == 0) return out;
  out.reserve(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    out.push_back({b * per_batch, (b + 1) * per_batch});
  }
  return out;
}

BatchSummary summarize_batches(std::span<const double> values) {
  BatchSummary out;
  out.count = values.size();
  if (values.empty()) {
    out.mean = std::numeric_limits<double>::quiet_NaN();
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) {
    out.std_error = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double var = ss / static_cast<double>(values.size() - 1);
  out.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

std::size_t worker_count() {
  if (const char* env = std::getenv("RISKALLOC_THREADS")) {
    try {
      const long n = std::stol(env);
      if (n >= 1) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace riskalloc::mc
