#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "riskalloc/dist/marginal.hpp"
#include "riskalloc/dist/portfolio.hpp"
#include "riskalloc/dist/sample.hpp"
#include "riskalloc/mc/engine.hpp"
#include "riskalloc/membership/verdict.hpp"

namespace riskalloc::membership {

inline constexpr double kDefaultSigmaMult = 4.0;
inline constexpr double kDefaultTol = 1e-9;

/// Compares, for every unit pair (i, j), the transform of S under the
/// partial size-biased transform at i with the one at j, on the same rows.
/// A point fails when |difference| exceeds sigma_mult paired batch-means
/// standard errors. Needs at least two units and 2 * n_batches rows; an
/// all-zero column raises DegenerateWeightsError.
MembershipVerdict check_main(const dist::SampleMatrix& m, std::span<const double> t_grid,
                             double sigma_mult = kDefaultSigmaMult, std::size_t n_batches = mc::kDefaultBatches);

/// check_main with size-bias of integer order k. The verdict is marked
/// necessary_only: equal curves do not imply equal k-th order allocations.
MembershipVerdict check_wk_necessary(const dist::SampleMatrix& m, int k, std::span<const double> t_grid,
                                     double sigma_mult = kDefaultSigmaMult,
                                     std::size_t n_batches = mc::kDefaultBatches);

/// Independent units: max over pairs i < j and the grid of
/// |phi_i(t) - phi_j(t)^(E[X_i] / E[X_j])|. Families without an analytic
/// transform raise UnsupportedFamilyError.
MembershipVerdict check_independent(const std::vector<dist::MarginalSpec>& marginals,
                                    std::span<const double> t_grid, double tol = kDefaultTol);

struct MergeOptions {
  /// Tolerance for the analytic comparison.
  double tol = kDefaultTol;
  /// Used when either block has no analytic transform.
  double sigma_mult = kDefaultSigmaMult;
  mc::McConfig mc;
};

/// Merging two independent portfolios X and Y. For every pair of units of
/// the merged vector, compares phi_{S_X^(i)} phi_{S_Y} with
/// phi_{S_Y^(j)} phi_{S_X} (and the within-block analogues). Analytic when
/// both blocks have closed-form transforms, otherwise check_main on blocks
/// sampled from independent streams.
MembershipVerdict check_merge(const dist::PortfolioSpec& x, const dist::PortfolioSpec& y,
                              std::span<const double> t_grid, const MergeOptions& options = {});

/// Relative deviation of the mean ratios E[X_i]/E[X_j] against E[Y_i]/E[Y_j].
MembershipVerdict check_amalgamate(std::span<const double> means_x, std::span<const double> means_y,
                                   double tol = kDefaultTol);

/// Several portfolios: every row of unit means is compared with the first.
MembershipVerdict check_amalgamate(const std::vector<std::vector<double>>& means, double tol = kDefaultTol);

/// Mixed-gamma first-order condition: equal scales and, for every unit, the
/// share shapes[i][k] / sum_j shapes[j][k] constant across components.
MembershipVerdict check_mg_w1(const std::vector<std::vector<double>>& shapes, std::span<const double> scales,
                              double tol = kDefaultTol);

/// Second-order analogue with shares g (g + 1) / (s (s + 1)), s the column
/// sum. Unequal scales fail.
MembershipVerdict check_mg_w2(const std::vector<std::vector<double>>& shapes, std::span<const double> scales,
                              double tol = kDefaultTol);

}  // namespace riskalloc::membership
