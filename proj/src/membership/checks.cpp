#include "riskalloc/membership/checks.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "riskalloc/errors.hpp"
#include "riskalloc/mc/batching.hpp"
#include "riskalloc/membership/laplace.hpp"

namespace riskalloc::membership {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double ipow(double x, int k) {
  double out = x;
  for (int e = 1; e < k; ++e) out *= x;
  return out;
}

std::vector<UnitPair> all_pairs(std::size_t n) {
  std::vector<UnitPair> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) out.emplace_back(i, j);
  return out;
}

// Folds per-point, per-pair gaps into the verdict.
struct WorstTracker {
  MembershipVerdict& v;

  void start(std::span<const double> grid) {
    v.evidence_t.assign(grid.begin(), grid.end());
    v.evidence_gap.assign(grid.size(), 0.0);
    v.worst_gap = 0.0;
  }
  void add(std::size_t g, double t, UnitPair pair, double gap, double raw) {
    if (std::isnan(gap)) gap = kInf;
    if (gap > v.evidence_gap[g]) v.evidence_gap[g] = gap;
    if (!v.worst_pair || gap > v.worst_gap) {
      v.worst_gap = gap;
      v.worst_t = t;
      v.worst_pair = pair;
      v.worst_raw_gap = raw;
    }
  }
};

MembershipVerdict compare_size_biased(const dist::SampleMatrix& m, int k, std::span<const double> t_grid,
                                      double sigma_mult, std::size_t n_batches, Criterion criterion) {
  validate_grid(t_grid);
  const std::size_t units = m.units();
  if (units < 2) throw DomainError("membership comparison needs at least two units");
  if (k < 1) throw DomainError("size-bias order must be a positive integer");
  if (!(sigma_mult > 0.0)) throw DomainError("sigma multiplier must be positive");
  if (n_batches < 2 || m.rows() < 2 * n_batches) {
    throw DomainError("empirical membership check needs at least " + std::to_string(2 * n_batches) + " rows");
  }
  const std::size_t n = m.rows();
  const std::size_t per_batch = n / n_batches;
  const auto s = m.row_sums();

  // Weights x^k, their totals per unit and per batch.
  std::vector<double> w(n * units);
  std::vector<double> den(units, 0.0);
  std::vector<double> den_batch(units * n_batches, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t b = j / per_batch;
    for (std::size_t i = 0; i < units; ++i) {
      const double x = ipow(m(j, i), k);
      w[j * units + i] = x;
      den[i] += x;
      if (b < n_batches) den_batch[i * n_batches + b] += x;
    }
  }
  for (std::size_t i = 0; i < units; ++i) {
    if (!(den[i] > 0.0)) {
      throw DegenerateWeightsError("unit " + std::to_string(i + 1) + " is identically zero; cannot size-bias");
    }
  }

  const auto pairs = all_pairs(units);
  // gaps[g][p] standardized, raws[g][p] raw difference.
  std::vector<std::vector<double>> gaps(t_grid.size(), std::vector<double>(pairs.size()));
  std::vector<std::vector<double>> raws(gaps);

  mc::parallel_for(t_grid.size(), [&](std::size_t g) {
    const double t = t_grid[g];
    std::vector<double> num(units, 0.0);
    std::vector<double> num_batch(units * n_batches, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(-t * s[j]);
      const std::size_t b = j / per_batch;
      for (std::size_t i = 0; i < units; ++i) {
        const double term = w[j * units + i] * e;
        num[i] += term;
        if (b < n_batches) num_batch[i * n_batches + b] += term;
      }
    }
    std::vector<double> diffs;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [a, c] = pairs[p];
      const double diff = num[a] / den[a] - num[c] / den[c];
      diffs.clear();
      for (std::size_t b = 0; b < n_batches; ++b) {
        const double da = den_batch[a * n_batches + b];
        const double dc = den_batch[c * n_batches + b];
        if (da > 0.0 && dc > 0.0) diffs.push_back(num_batch[a * n_batches + b] / da - num_batch[c * n_batches + b] / dc);
      }
      const double se = mc::summarize_batches(diffs).std_error;
      double z;
      if (se > 0.0) {
        z = std::abs(diff) / se;
      } else {
        z = diff == 0.0 ? 0.0 : kInf;
      }
      gaps[g][p] = z;
      raws[g][p] = diff;
    }
  });

  MembershipVerdict v;
  v.criterion = criterion;
  v.threshold = sigma_mult;
  v.standardized = true;
  v.units_compared = pairs;
  WorstTracker tracker{v};
  tracker.start(t_grid);
  for (std::size_t g = 0; g < t_grid.size(); ++g)
    for (std::size_t p = 0; p < pairs.size(); ++p) tracker.add(g, t_grid[g], pairs[p], gaps[g][p], raws[g][p]);
  v.decide();
  return v;
}

void check_mg_parameters(const std::vector<std::vector<double>>& shapes, std::span<const double> scales) {
  dist::MixedGamma mg;
  mg.shapes = shapes;
  mg.scales.assign(scales.begin(), scales.end());
  const std::size_t comps = shapes.empty() ? 0 : shapes.front().size();
  mg.weights.assign(comps, comps == 0 ? 0.0 : 1.0 / static_cast<double>(comps));
  // Any valid probability vector will do; only shapes and scales are checked here.
  if (comps > 0) {
    double total = 0.0;
    for (std::size_t c = 0; c + 1 < comps; ++c) total += mg.weights[c];
    mg.weights.back() = 1.0 - total;
  }
  dist::validate(dist::PortfolioSpec(mg));
}

// Largest relative deviation of scales from the first one, with its row.
std::pair<double, std::size_t> scale_spread(std::span<const double> scales) {
  double worst = 0.0;
  std::size_t row = 0;
  for (std::size_t i = 1; i < scales.size(); ++i) {
    const double d = std::abs(scales[i] - scales[0]) / scales[0];
    if (d > worst) {
      worst = d;
      row = i;
    }
  }
  return {worst, row};
}

template <class Share>
MembershipVerdict mg_share_check(const std::vector<std::vector<double>>& shapes, std::span<const double> scales,
                                 double tol, Criterion criterion, Share&& share) {
  check_mg_parameters(shapes, scales);
  MembershipVerdict v;
  v.criterion = criterion;
  v.threshold = tol;
  const auto [spread, spread_row] = scale_spread(scales);
  const std::size_t units = shapes.size();
  const std::size_t comps = shapes.front().size();
  std::vector<double> col_sums(comps, 0.0);
  for (std::size_t c = 0; c < comps; ++c)
    for (std::size_t i = 0; i < units; ++i) col_sums[c] += shapes[i][c];

  double worst = 0.0;
  UnitPair where{0, 0};
  for (std::size_t i = 0; i < units; ++i) {
    const double base = share(shapes[i][0], col_sums[0]);
    for (std::size_t c = 1; c < comps; ++c) {
      const double d = std::abs(share(shapes[i][c], col_sums[c]) - base);
      if (d > worst) {
        worst = d;
        where = {i, c};
      }
    }
  }
  if (spread > tol && spread >= worst) {
    v.worst_gap = spread;
    v.worst_pair = UnitPair{spread_row, 0};
    std::ostringstream msg;
    msg << "scales differ: unit " << spread_row + 1 << " deviates from unit 1 by " << spread << " (relative)";
    v.reason = msg.str();
  } else {
    v.worst_gap = std::max(worst, spread);
    v.worst_pair = where;
    std::ostringstream msg;
    msg << "largest share deviation at unit " << where.first + 1 << ", component " << where.second + 1;
    v.reason = msg.str();
  }
  v.worst_raw_gap = v.worst_gap;
  v.decide();
  return v;
}

}  // namespace

MembershipVerdict check_main(const dist::SampleMatrix& m, std::span<const double> t_grid, double sigma_mult,
                             std::size_t n_batches) {
  return compare_size_biased(m, 1, t_grid, sigma_mult, n_batches, Criterion::main);
}

MembershipVerdict check_wk_necessary(const dist::SampleMatrix& m, int k, std::span<const double> t_grid,
                                     double sigma_mult, std::size_t n_batches) {
  MembershipVerdict v = compare_size_biased(m, k, t_grid, sigma_mult, n_batches, Criterion::wk_necessary);
  v.necessary_only = true;
  v.reason = "equal order-" + std::to_string(k) + " size-biased sums are necessary, not sufficient";
  return v;
}

MembershipVerdict check_independent(const std::vector<dist::MarginalSpec>& marginals,
                                    std::span<const double> t_grid, double tol) {
  validate_grid(t_grid);
  if (marginals.size() < 2) throw DomainError("independence check needs at least two marginals");
  std::vector<double> means;
  for (const auto& m : marginals) {
    dist::validate(m);
    if (std::holds_alternative<dist::InvertedBeta>(m)) {
      throw UnsupportedFamilyError("inverted_beta has no analytic Laplace transform; use the empirical check");
    }
    const double mean = dist::analytic_mean(m);
    if (!(mean > 0.0)) throw DomainError("independence check needs positive means");
    means.push_back(mean);
  }

  MembershipVerdict v;
  v.criterion = Criterion::independent;
  v.threshold = tol;
  v.units_compared = all_pairs(marginals.size());
  WorstTracker tracker{v};
  tracker.start(t_grid);
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const double t = t_grid[g];
    for (const auto& pair : v.units_compared) {
      const auto [i, j] = pair;
      const double lhs = dist::analytic_laplace(marginals[i], t);
      const double rhs = std::pow(dist::analytic_laplace(marginals[j], t), means[i] / means[j]);
      const double gap = std::abs(lhs - rhs);
      tracker.add(g, t, pair, gap, lhs - rhs);
    }
  }
  v.decide();
  return v;
}

MembershipVerdict check_merge(const dist::PortfolioSpec& x, const dist::PortfolioSpec& y,
                              std::span<const double> t_grid, const MergeOptions& options) {
  validate_grid(t_grid);
  dist::validate(x);
  dist::validate(y);
  const std::size_t nx = dist::unit_count(x);
  const std::size_t ny = dist::unit_count(y);

  if (!has_analytic_laplace(x) || !has_analytic_laplace(y)) {
    const auto merged = mc::sample_merged(x, y, options.mc);
    MembershipVerdict v = check_main(merged, t_grid, options.sigma_mult, options.mc.n_batches);
    v.criterion = Criterion::merge;
    v.reason = "empirical: blocks sampled from independent streams";
    return v;
  }

  MembershipVerdict v;
  v.criterion = Criterion::merge;
  v.threshold = options.tol;
  v.units_compared = all_pairs(nx + ny);
  v.reason = "analytic";
  WorstTracker tracker{v};
  tracker.start(t_grid);
  std::vector<double> curve(nx + ny);
  for (std::size_t g = 0; g < t_grid.size(); ++g) {
    const double t = t_grid[g];
    const double sx = analytic_sum_laplace(x, t);
    const double sy = analytic_sum_laplace(y, t);
    if (!(sx > 0.0) || !(sy > 0.0)) {
      std::ostringstream msg;
      msg << "Laplace transform underflows to zero at t = " << t;
      throw NumericError(msg.str());
    }
    for (std::size_t u = 0; u < nx; ++u) curve[u] = analytic_partial_size_biased_laplace(x, u, t) * sy;
    for (std::size_t u = 0; u < ny; ++u) curve[nx + u] = sx * analytic_partial_size_biased_laplace(y, u, t);
    for (const auto& pair : v.units_compared) {
      const double diff = curve[pair.first] - curve[pair.second];
      tracker.add(g, t, pair, std::abs(diff), diff);
    }
  }
  v.decide();
  return v;
}

MembershipVerdict check_amalgamate(std::span<const double> means_x, std::span<const double> means_y, double tol) {
  return check_amalgamate(std::vector<std::vector<double>>{{means_x.begin(), means_x.end()},
                                                           {means_y.begin(), means_y.end()}},
                          tol);
}

MembershipVerdict check_amalgamate(const std::vector<std::vector<double>>& means, double tol) {
  if (means.size() < 2) throw DomainError("amalgamation check needs at least two portfolios");
  const std::size_t units = means.front().size();
  if (units < 2) throw DomainError("amalgamation check needs at least two units");
  for (const auto& row : means) {
    if (row.size() != units) throw DomainError("mean vectors differ in length");
    for (double v : row)
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("amalgamation check needs positive finite means");
  }

  MembershipVerdict v;
  v.criterion = Criterion::amalgamate;
  v.threshold = tol;
  v.units_compared = all_pairs(units);
  std::size_t worst_row = 0;
  for (std::size_t r = 1; r < means.size(); ++r) {
    for (const auto& pair : v.units_compared) {
      const double base = means[0][pair.first] / means[0][pair.second];
      const double other = means[r][pair.first] / means[r][pair.second];
      const double gap = std::abs(other - base) / base;
      if (!v.worst_pair || gap > v.worst_gap) {
        v.worst_gap = gap;
        v.worst_raw_gap = other - base;
        v.worst_pair = pair;
        worst_row = r;
      }
    }
  }
  std::ostringstream msg;
  msg << "largest mean-ratio deviation in portfolio " << worst_row + 1 << " against portfolio 1";
  v.reason = msg.str();
  v.decide();
  return v;
}

MembershipVerdict check_mg_w1(const std::vector<std::vector<double>>& shapes, std::span<const double> scales,
                              double tol) {
  return mg_share_check(shapes, scales, tol, Criterion::mg_w1, [](double g, double s) { return g / s; });
}

MembershipVerdict check_mg_w2(const std::vector<std::vector<double>>& shapes, std::span<const double> scales,
                              double tol) {
  return mg_share_check(shapes, scales, tol, Criterion::mg_w2,
                        [](double g, double s) { return g * (g + 1.0) / (s * (s + 1.0)); });
}

}  // namespace riskalloc::membership
