#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "riskalloc/dist/marginal.hpp"
#include "riskalloc/dist/portfolio.hpp"
#include "riskalloc/dist/sample.hpp"

namespace riskalloc::membership {

enum class CurveSource { analytic, empirical };

/// A Laplace transform evaluated on a grid of positive t.
struct LaplaceCurve {
  std::vector<double> t_grid;
  std::vector<double> values;
  CurveSource source = CurveSource::analytic;
  /// Empirical curves computed under importance weights.
  bool weighted = false;
  /// Batch-means standard error per grid point (empirical curves).
  std::optional<std::vector<double>> std_error;
};

/// `points` log-spaced values from lo to hi inclusive. Defaults: 25 points
/// over [1e-3, 10].
std::vector<double> default_t_grid(std::size_t points = 25, double lo = 1e-3, double hi = 10.0);

/// Throws DomainError unless the grid is non-empty, positive and strictly
/// increasing.
void validate_grid(std::span<const double> t_grid);

/// value(t) = sum_j w_j exp(-t s_j) / sum_j w_j, unit weights when none are
/// given. The standard error comes from n_batches contiguous batches (NaN
/// with fewer than 2 rows per batch).
LaplaceCurve empirical_laplace(std::span<const double> s, std::span<const double> t_grid,
                               std::optional<std::span<const double>> weights = std::nullopt,
                               std::size_t n_batches = 50);

/// Curve of S for a sample, optionally under its importance weights.
LaplaceCurve empirical_laplace(const dist::SampleMatrix& m, std::span<const double> t_grid);
LaplaceCurve empirical_laplace(const dist::WeightedSample& w, std::span<const double> t_grid);

/// Transform of a marginal, size-biased to integer order k (k = 0: plain).
LaplaceCurve analytic_laplace_curve(const dist::MarginalSpec& m, std::span<const double> t_grid, int k = 0);

/// True when analytic_sum_laplace / analytic_partial_size_biased_laplace
/// cover the portfolio: independent or iid units with transform-bearing
/// marginals, and mixed-gamma.
bool has_analytic_laplace(const dist::PortfolioSpec& spec);

/// E[exp(-t S)].
double analytic_sum_laplace(const dist::PortfolioSpec& spec, double t);

/// E[X_unit^k exp(-t S)] / E[X_unit^k]: the transform of S after the
/// partial size-biased transform of order k at `unit`.
double analytic_partial_size_biased_laplace(const dist::PortfolioSpec& spec, std::size_t unit, double t,
                                            int k = 1);

}  // namespace riskalloc::membership
