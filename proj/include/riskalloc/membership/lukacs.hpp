#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "riskalloc/dist/marginal.hpp"
#include "riskalloc/dist/sample.hpp"
#include "riskalloc/membership/verdict.hpp"

namespace riskalloc::membership {

struct LukacsOptions {
  double tol = 1e-9;
  /// Rows for the empirical independence diagnostic; 0 skips it.
  std::size_t n_samples = 0;
  std::uint64_t seed = 1;
  std::size_t bins = 10;
  /// Diagnostic is consistent with independence when p_value > alpha.
  double alpha = 1e-3;
};

/// Independent units belong to both the first- and second-order sets exactly
/// when every marginal is gamma and all scales agree. The classification
/// follows that rule; the first- and second-order transform comparisons and
/// the optional diagnostic are attached as evidence.
LukacsVerdict lukacs_check(const std::vector<dist::MarginalSpec>& marginals, const LukacsOptions& options = {});

/// Pearson chi-square test of independence between X_unit / S and S over a
/// bins x bins grid of equal-count rank cells. Rows with S = 0 are skipped.
IndependenceDiagnostic independence_diagnostic(const dist::SampleMatrix& m, std::size_t unit = 0,
                                               std::size_t bins = 10, double alpha = 1e-3);

}  // namespace riskalloc::membership
