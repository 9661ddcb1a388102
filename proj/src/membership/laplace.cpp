#include "riskalloc/membership/laplace.hpp"

#include <cmath>

#include "riskalloc/errors.hpp"
#include "riskalloc/mc/batching.hpp"

namespace riskalloc::membership {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Rising factorial a (a + 1) ... (a + k - 1).
double rising(double a, int k) {
  double out = 1.0;
  for (int e = 0; e < k; ++e) out *= a + e;
  return out;
}

bool marginal_has_transform(const dist::MarginalSpec& m) { return !std::holds_alternative<dist::InvertedBeta>(m); }

double independent_partial(const std::vector<dist::MarginalSpec>& ms, std::size_t unit, double t, int k) {
  double out = 1.0;
  for (std::size_t i = 0; i < ms.size(); ++i)
    out *= i == unit ? dist::analytic_size_biased_laplace(ms[i], t, k) : dist::analytic_laplace(ms[i], t);
  return out;
}

double mixed_gamma_partial(const dist::MixedGamma& mg, std::size_t unit, double t, int k) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t c = 0; c < mg.weights.size(); ++c) {
    const double tilt = k == 0 ? 1.0 : rising(mg.shapes[unit][c], k);
    double phi = 1.0;
    for (std::size_t i = 0; i < mg.scales.size(); ++i) {
      const double shape = mg.shapes[i][c] + (i == unit ? k : 0);
      phi *= std::pow(1.0 + mg.scales[i] * t, -shape);
    }
    num += mg.weights[c] * tilt * phi;
    den += mg.weights[c] * tilt;
  }
  return num / den;
}

double partial(const dist::PortfolioSpec& spec, std::size_t unit, double t, int k) {
  if (!(t > 0.0)) throw DomainError("Laplace transform argument must be positive");
  if (!has_analytic_laplace(spec)) {
    throw UnsupportedFamilyError(dist::family_name(spec) + ": no analytic Laplace transform for the sum");
  }
  if (unit >= dist::unit_count(spec)) throw DomainError("unit index out of range");
  if (const auto* mg = std::get_if<dist::MixedGamma>(&spec)) return mixed_gamma_partial(*mg, unit, t, k);
  return independent_partial(dist::independent_marginals(spec), unit, t, k);
}

}  // namespace

std::vector<double> default_t_grid(std::size_t points, double lo, double hi) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw DomainError("t-grid needs >= 2 points and 0 < lo < hi");
  std::vector<double> grid(points);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double e = a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = std::pow(10.0, e);
  }
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

void validate_grid(std::span<const double> t_grid) {
  if (t_grid.empty()) throw DomainError("t-grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i])) throw DomainError("t-grid entries must be positive");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw DomainError("t-grid must be strictly increasing");
  }
}

LaplaceCurve empirical_laplace(std::span<const double> s, std::span<const double> t_grid,
                               std::optional<std::span<const double>> weights, std::size_t n_batches) {
  validate_grid(t_grid);
  if (s.empty()) throw DomainError("empirical Laplace transform of an empty sample");
  if (weights) {
    if (weights->size() != s.size()) throw DomainError("weights and sample differ in length");
    double total = 0.0;
    for (double w : *weights) {
      if (!(w >= 0.0)) throw DomainError("weights must be non-negative");
      total += w;
    }
    if (!(total > 0.0)) throw DegenerateWeightsError("weights have zero total");
  }

  LaplaceCurve curve;
  curve.t_grid.assign(t_grid.begin(), t_grid.end());
  curve.values.assign(t_grid.size(), 0.0);
  curve.source = CurveSource::empirical;
  curve.weighted = weights.has_value();
  std::vector<double> se(t_grid.size(), NAN);

  const bool batched = n_batches >= 2 && s.size() >= 2 * n_batches;
  const std::size_t per_batch = batched ? s.size() / n_batches : 0;
  mc::parallel_for(t_grid.size(), [&](std::size_t g) {
    const double t = t_grid[g];
    double num = 0.0;
    double den = 0.0;
    std::vector<double> batch_num(batched ? n_batches : 0, 0.0);
    std::vector<double> batch_den(batch_num.size(), 0.0);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double w = weights ? (*weights)[j] : 1.0;
      const double term = w * std::exp(-t * s[j]);
      num += term;
      den += w;
      if (batched) {
        const std::size_t b = j / per_batch;
        if (b < n_batches) {
          batch_num[b] += term;
          batch_den[b] += w;
        }
      }
    }
    curve.values[g] = num / den;
    if (batched) {
      std::vector<double> per;
      for (std::size_t b = 0; b < n_batches; ++b)
        if (batch_den[b] > 0.0) per.push_back(batch_num[b] / batch_den[b]);
      se[g] = mc::summarize_batches(per).std_error;
    }
  });
  curve.std_error = std::move(se);
  return curve;
}

LaplaceCurve empirical_laplace(const dist::SampleMatrix& m, std::span<const double> t_grid) {
  return empirical_laplace(m.row_sums(), t_grid);
}

LaplaceCurve empirical_laplace(const dist::WeightedSample& w, std::span<const double> t_grid) {
  return empirical_laplace(w.base.row_sums(), t_grid, std::span<const double>(w.weights));
}

LaplaceCurve analytic_laplace_curve(const dist::MarginalSpec& m, std::span<const double> t_grid, int k) {
  validate_grid(t_grid);
  LaplaceCurve curve;
  curve.t_grid.assign(t_grid.begin(), t_grid.end());
  for (double t : t_grid) curve.values.push_back(dist::analytic_size_biased_laplace(m, t, k));
  return curve;
}

bool has_analytic_laplace(const dist::PortfolioSpec& spec) {
  return std::visit(overloaded{
                        [](const dist::Independent& p) {
                          for (const auto& m : p.marginals)
                            if (!marginal_has_transform(m)) return false;
                          return true;
                        },
                        [](const dist::IidExchangeable& p) { return marginal_has_transform(p.marginal); },
                        [](const dist::MixedGamma&) { return true; },
                        [](const auto&) { return false; },
                    },
                    spec);
}

double analytic_sum_laplace(const dist::PortfolioSpec& spec, double t) { return partial(spec, 0, t, 0); }

double analytic_partial_size_biased_laplace(const dist::PortfolioSpec& spec, std::size_t unit, double t, int k) {
  if (k < 1) throw DomainError("size-bias order must be a positive integer");
  return partial(spec, unit, t, k);
}

}  // namespace riskalloc::membership
