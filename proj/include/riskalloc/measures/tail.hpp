#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskalloc::measures {

/// What to do when {S > s_q} is empty.
enum class TailPolicy {
  /// Throw DegenerateTailError.
  Strict,
  /// Use the convention CTE = GTE = VaR = s_q and E[X_i]/E[S] allocations.
  ConventionFallback,
};

/// Rows in the strict tail {S > s_q}.
struct TailSelection {
  double q = 0.0;
  double threshold = 0.0;
  std::vector<std::size_t> indices;

  std::size_t tail_count() const noexcept { return indices.size(); }
};

/// Empirical generalized inverse: the k-th order statistic with
/// k = max(1, ceil(n q)). Requires q in [0, 1) and a non-empty sample.
double var_q(std::span<const double> s, double q);

TailSelection select_tail(std::span<const double> s, double q);

/// Mean of the tail observations. An empty tail throws DegenerateTailError
/// under TailPolicy::Strict and returns s_q under the fallback.
double cte(std::span<const double> s, double q, TailPolicy policy = TailPolicy::Strict);

/// exp(mean log) of the tail observations; throws DomainError if any tail
/// value is not strictly positive.
double gte(std::span<const double> s, double q, TailPolicy policy = TailPolicy::Strict);

/// exp(mean log x) over all values.
double geometric_mean(std::span<const double> values);

}  // namespace riskalloc::measures
