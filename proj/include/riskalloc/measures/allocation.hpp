#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "riskalloc/dist/sample.hpp"
#include "riskalloc/measures/tail.hpp"

namespace riskalloc::measures {

/// Per-unit allocation figures. Every *_se is a 1-sigma batch-means standard
/// error computed with the global threshold s_q; NaN when fewer than two
/// batches have a non-empty tail.
struct UnitAllocation {
  /// E[X_i | S > s_q] / E[S | S > s_q]
  double r = 0.0;
  double r_se = NAN;
  /// E[X_i / S | S > s_q]
  double r_tilde = 0.0;
  double r_tilde_se = NAN;
  /// Cov(X_i / S, S | S > s_q)
  double cond_cov = 0.0;
  double cond_cov_se = NAN;
  /// Standard error of r - r_tilde, paired on the same rows.
  double gap_se = NAN;
  /// r - r_tilde - cond_cov / cte_s
  double identity_residual = 0.0;
  /// kappa * r when a capital amount was supplied.
  std::optional<double> kappa_share;
};

struct AllocationReport {
  double q = 0.0;
  double var_s = 0.0;
  double cte_s = 0.0;
  double gte_s = 0.0;
  std::size_t tail_count = 0;
  std::vector<UnitAllocation> units;
  std::optional<double> kappa;
  /// Set when the tail was empty and TailPolicy::ConventionFallback applied.
  bool degenerate_fallback = false;
};

struct AllocationOptions {
  std::size_t n_batches = 50;
  TailPolicy policy = TailPolicy::Strict;
  std::optional<double> kappa;
  /// Tails with fewer rows raise DegenerateTailError (strict policy).
  std::size_t min_tail_count = 1;
};

AllocationReport allocations(const dist::SampleMatrix& m, double q, const AllocationOptions& options = {});

/// Cov(X_i / S, S | S > s_q) computed as mean(R S) - mean(R) mean(S).
double cond_cov(const dist::SampleMatrix& m, double q, std::size_t unit);

/// k-th order allocations:
///   r^k_i = E[X_i^k | tail] / E[S^k | tail],  r~^k_i = E[(X_i / S)^k | tail].
/// Only k = 1 sums to one.
struct KthAllocations {
  int k = 1;
  double q = 0.0;
  std::size_t tail_count = 0;
  std::vector<double> r;
  std::vector<double> r_tilde;
  std::vector<double> r_se;
  std::vector<double> r_tilde_se;
  /// Paired standard error of r^k_i - r~^k_i.
  std::vector<double> gap_se;
};

KthAllocations kth_allocations(const dist::SampleMatrix& m, double q, int k, std::size_t n_batches = 50);

/// Strict tail weight 1{x > threshold}.
struct TailIndicator {
  double threshold;
  double operator()(double x) const noexcept { return x > threshold ? 1.0 : 0.0; }
};

inline TailIndicator tail_indicator(std::span<const double> s, double q) { return {var_q(s, q)}; }

/// mean(v(S) w(S)) / mean(w(S)). Throws DegenerateWeightsError on zero total
/// weight.
template <class V, class W>
double weighted_risk_measure(V&& v, W&& w, std::span<const double> s);

/// Central difference of u -> GTE_q(S + (u - 1) X_unit) at u = 1 with step h,
/// both sides evaluated on the same rows.
double gte_gradient_fd(const dist::SampleMatrix& m, double q, std::size_t unit, double h = 1e-3);

/// Same on n rows of spec drawn with seed.
double gte_gradient_fd(const dist::PortfolioSpec& spec, double q, std::size_t unit, double h, std::size_t n,
                       std::uint64_t seed);

}  // namespace riskalloc::measures

#include "riskalloc/measures/weighted.ipp"
