#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace riskalloc::membership {

enum class Criterion { main, independent, merge, amalgamate, mg_w1, mg_w2, wk_necessary, lukacs };

std::string criterion_name(Criterion c);
/// Throws DomainError for an unknown name.
Criterion parse_criterion(const std::string& name);

using UnitPair = std::pair<std::size_t, std::size_t>;

/// Outcome of one membership criterion. pass is always worst_gap <= threshold.
///
/// Analytic checks store raw gaps and a tolerance. Empirical checks store the
/// gap divided by its paired standard error and use sigma_mult as threshold;
/// the raw difference at the worst point is kept in worst_raw_gap.
struct MembershipVerdict {
  Criterion criterion = Criterion::main;
  bool pass = false;
  /// NaN for criteria without a t-grid.
  double worst_t = NAN;
  double worst_gap = 0.0;
  double threshold = 0.0;
  double worst_raw_gap = 0.0;
  bool standardized = false;
  /// Passing is necessary but not sufficient for membership.
  bool necessary_only = false;
  std::vector<UnitPair> units_compared;
  /// Pair at the worst point. For mixed-gamma share checks: (row, component).
  std::optional<UnitPair> worst_pair;
  std::string reason;
  /// Worst gap over all pairs at each grid point.
  std::vector<double> evidence_t;
  std::vector<double> evidence_gap;

  /// Sets pass from worst_gap and threshold.
  void decide() { pass = worst_gap <= threshold; }
};

/// Empirical test of independence between R_1 = X_1 / S and S on a
/// bins x bins grid of rank-based cells.
struct IndependenceDiagnostic {
  std::size_t n = 0;
  std::size_t bins = 0;
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
  double alpha = 1e-3;
  bool consistent = false;
};

struct LukacsVerdict {
  /// Gamma marginals with one common scale.
  MembershipVerdict classification;
  /// Pairwise first-order transform condition; absent when a marginal has
  /// no analytic transform.
  std::optional<MembershipVerdict> first_order;
  /// Second-order partial size-bias comparison (necessary condition only).
  std::optional<MembershipVerdict> second_order;
  std::optional<IndependenceDiagnostic> diagnostic;
};

nlohmann::json to_json(const MembershipVerdict& v);
nlohmann::json to_json(const IndependenceDiagnostic& d);
nlohmann::json to_json(const LukacsVerdict& v);

}  // namespace riskalloc::membership
