#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <utility>

#include "riskalloc/dist/sample.hpp"
#include "riskalloc/mc/batching.hpp"

namespace riskalloc::mc {

struct McConfig {
  std::size_t n_samples = 1000000;
  std::size_t n_batches = kDefaultBatches;
  std::uint64_t seed = 1;
  std::uint32_t stream_id = 0;

  /// Rows actually simulated: n_samples rounded down to a multiple of n_batches.
  std::size_t effective_samples() const { return n_samples - n_samples % n_batches; }
  /// Throws DomainError unless n_batches >= 2 and every batch gets a row.
  void validate() const;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_effective = 0;
};

using Statistic = std::function<double(const dist::SampleMatrix&)>;

/// Evaluates f on each of cfg.n_batches independent batches of the
/// portfolio. value is the mean of the batch statistics and std_error their
/// standard deviation over sqrt(batches). Batches whose statistic throws a
/// riskalloc::Error are dropped; more than 20% dropped raises
/// AggregationError.
Estimate batched_estimate(const Statistic& f, const McConfig& cfg, const dist::PortfolioSpec& spec);

/// Two samples driven by identical underlying random streams, so they differ
/// only through the parameters. Unit counts must agree.
std::pair<dist::SampleMatrix, dist::SampleMatrix> crn_pair(const dist::PortfolioSpec& a,
                                                           const dist::PortfolioSpec& b, const McConfig& cfg);

/// Concatenates the units of two independently sampled blocks (streams
/// stream_id and stream_id + 1): the merged portfolio (X_1..X_n, Y_1..Y_m).
dist::SampleMatrix sample_merged(const dist::PortfolioSpec& x, const dist::PortfolioSpec& y,
                                 const McConfig& cfg);

/// Unit-wise sums X_i + Y_i of two independently sampled blocks with equal
/// unit counts.
dist::SampleMatrix sample_amalgamated(const dist::PortfolioSpec& x, const dist::PortfolioSpec& y,
                                      const McConfig& cfg);

}  // namespace riskalloc::mc
