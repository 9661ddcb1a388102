#include "riskalloc/membership/lukacs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "riskalloc/errors.hpp"
#include "riskalloc/membership/checks.hpp"
#include "riskalloc/membership/laplace.hpp"

namespace riskalloc::membership {
namespace {

// Equal-count bin of every value by rank; ties broken by position.
std::vector<std::size_t> rank_bins(const std::vector<double>& v, std::size_t bins) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<std::size_t> out(v.size());
  for (std::size_t r = 0; r < order.size(); ++r) out[order[r]] = r * bins / order.size();
  return out;
}

MembershipVerdict classify(const std::vector<dist::MarginalSpec>& marginals, double tol) {
  MembershipVerdict v;
  v.criterion = Criterion::lukacs;
  v.threshold = tol;
  const auto* first = std::get_if<dist::Gamma>(&marginals.front());
  for (std::size_t i = 0; i < marginals.size(); ++i) {
    if (!std::holds_alternative<dist::Gamma>(marginals[i])) {
      v.worst_gap = std::numeric_limits<double>::infinity();
      v.worst_pair = UnitPair{i, i};
      v.reason = "unit " + std::to_string(i + 1) + " is " + dist::family_name(marginals[i]) + ", not gamma";
      v.decide();
      return v;
    }
  }
  for (std::size_t i = 1; i < marginals.size(); ++i) {
    const double scale = std::get<dist::Gamma>(marginals[i]).scale;
    const double d = std::abs(scale - first->scale) / first->scale;
    if (d > v.worst_gap) {
      v.worst_gap = d;
      v.worst_pair = UnitPair{0, i};
    }
  }
  v.worst_raw_gap = v.worst_gap;
  v.reason = v.worst_gap <= tol ? "gamma marginals with a common scale" : "gamma marginals with different scales";
  v.decide();
  return v;
}

// Order-2 partial size-biased sums compared across units.
MembershipVerdict second_order_leg(const std::vector<dist::MarginalSpec>& marginals, double tol) {
  const dist::PortfolioSpec spec = dist::Independent{marginals};
  const auto grid = default_t_grid();
  MembershipVerdict v;
  v.criterion = Criterion::wk_necessary;
  v.threshold = tol;
  v.necessary_only = true;
  v.evidence_t = grid;
  v.evidence_gap.assign(grid.size(), 0.0);
  std::vector<double> curve(marginals.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (std::size_t i = 0; i < marginals.size(); ++i)
      curve[i] = analytic_partial_size_biased_laplace(spec, i, grid[g], 2);
    for (std::size_t i = 0; i < marginals.size(); ++i) {
      for (std::size_t j = i + 1; j < marginals.size(); ++j) {
        if (g == 0) v.units_compared.emplace_back(i, j);
        const double gap = std::abs(curve[i] - curve[j]);
        v.evidence_gap[g] = std::max(v.evidence_gap[g], gap);
        if (!v.worst_pair || gap > v.worst_gap) {
          v.worst_gap = gap;
          v.worst_raw_gap = curve[i] - curve[j];
          v.worst_t = grid[g];
          v.worst_pair = UnitPair{i, j};
        }
      }
    }
  }
  v.decide();
  return v;
}

}  // namespace

IndependenceDiagnostic independence_diagnostic(const dist::SampleMatrix& m, std::size_t unit, std::size_t bins,
                                               double alpha) {
  if (unit >= m.units()) throw DomainError("unit index out of range");
  if (bins < 2) throw DomainError("independence diagnostic needs at least 2 bins");
  const auto s_all = m.row_sums();
  std::vector<double> ratio;
  std::vector<double> s;
  for (std::size_t j = 0; j < m.rows(); ++j) {
    if (!(s_all[j] > 0.0)) continue;
    ratio.push_back(m(j, unit) / s_all[j]);
    s.push_back(s_all[j]);
  }
  if (ratio.size() < 5 * bins * bins) throw DomainError("independence diagnostic needs 5 rows per cell");

  const auto rb = rank_bins(ratio, bins);
  const auto sb = rank_bins(s, bins);
  std::vector<double> table(bins * bins, 0.0);
  std::vector<double> row_tot(bins, 0.0);
  std::vector<double> col_tot(bins, 0.0);
  for (std::size_t j = 0; j < ratio.size(); ++j) {
    table[rb[j] * bins + sb[j]] += 1.0;
    row_tot[rb[j]] += 1.0;
    col_tot[sb[j]] += 1.0;
  }
  const double n = static_cast<double>(ratio.size());
  double chi2 = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    for (std::size_t b = 0; b < bins; ++b) {
      const double expected = row_tot[a] * col_tot[b] / n;
      const double d = table[a * bins + b] - expected;
      chi2 += d * d / expected;
    }
  }
  IndependenceDiagnostic out;
  out.n = ratio.size();
  out.bins = bins;
  out.statistic = chi2;
  out.dof = static_cast<double>((bins - 1) * (bins - 1));
  out.p_value = boost::math::gamma_q(out.dof / 2.0, chi2 / 2.0);
  out.alpha = alpha;
  out.consistent = out.p_value > alpha;
  return out;
}

LukacsVerdict lukacs_check(const std::vector<dist::MarginalSpec>& marginals, const LukacsOptions& options) {
  if (marginals.size() < 2) throw DomainError("gamma characterization needs at least two marginals");
  for (const auto& m : marginals) dist::validate(m);

  LukacsVerdict out;
  out.classification = classify(marginals, options.tol);
  try {
    out.first_order = check_independent(marginals, default_t_grid(), options.tol);
    out.second_order = second_order_leg(marginals, options.tol);
  } catch (const UnsupportedFamilyError&) {
    // Leave the transform legs empty for families without closed forms.
  }
  if (options.n_samples > 0) {
    const auto sample = dist::sample_portfolio(dist::Independent{marginals}, options.n_samples, options.seed);
    out.diagnostic = independence_diagnostic(sample, 0, options.bins, options.alpha);
  }
  return out;
}

}  // namespace riskalloc::membership
