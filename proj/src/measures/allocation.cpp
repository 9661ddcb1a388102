#include "riskalloc/measures/allocation.hpp"

#include <cmath>
#include <sstream>

#include "riskalloc/errors.hpp"
#include "riskalloc/mc/batching.hpp"

namespace riskalloc::measures {
namespace {

double ipow(double x, int k) {
  double out = x;
  for (int e = 1; e < k; ++e) out *= x;
  return out;
}

// Tail sums for one group of rows.
struct TailSums {
  std::size_t count = 0;
  double s = 0.0;
  double s_k = 0.0;
  std::vector<double> x_k;
  std::vector<double> ratio_k;
  std::vector<double> ratio_s;

  explicit TailSums(std::size_t units) : x_k(units, 0.0), ratio_k(units, 0.0), ratio_s(units, 0.0) {}

  void add(std::span<const double> row, double total, int k) {
    ++count;
    s += total;
    s_k += ipow(total, k);
    for (std::size_t i = 0; i < row.size(); ++i) {
      const double ratio = row[i] / total;
      x_k[i] += ipow(row[i], k);
      ratio_k[i] += ipow(ratio, k);
      ratio_s[i] += ratio * total;
    }
  }

  double r(std::size_t i) const { return x_k[i] / s_k; }
  double r_tilde(std::size_t i) const { return ratio_k[i] / static_cast<double>(count); }
  double cov(std::size_t i) const {
    const double n = static_cast<double>(count);
    return ratio_s[i] / n - (ratio_k[i] / n) * (s / n);
  }
};

TailSums sum_tail(const dist::SampleMatrix& m, const TailSelection& tail, int k) {
  TailSums sums(m.units());
  const auto s = m.row_sums();
  for (std::size_t j : tail.indices) sums.add(m.row(j), s[j], k);
  return sums;
}

std::vector<TailSums> sum_tail_batches(const dist::SampleMatrix& m, const TailSelection& tail, int k,
                                       std::size_t n_batches) {
  std::vector<TailSums> out;
  if (n_batches < 2 || m.rows() < 2 * n_batches) return out;
  const std::size_t per_batch = m.rows() / n_batches;
  out.assign(n_batches, TailSums(m.units()));
  const auto s = m.row_sums();
  for (std::size_t j : tail.indices) {
    const std::size_t b = j / per_batch;
    if (b < n_batches) out[b].add(m.row(j), s[j], k);
  }
  std::erase_if(out, [](const TailSums& t) { return t.count == 0; });
  return out;
}

template <class F>
double batch_se(const std::vector<TailSums>& batches, F&& stat) {
  std::vector<double> values;
  values.reserve(batches.size());
  for (const auto& b : batches) values.push_back(stat(b));
  return mc::summarize_batches(values).std_error;
}

void check_unit(const dist::SampleMatrix& m, std::size_t unit) {
  if (unit >= m.units()) {
    std::ostringstream msg;
    msg << "unit index " << unit << " out of range for " << m.units() << " units";
    throw DomainError(msg.str());
  }
}

[[noreturn]] void empty_tail(const TailSelection& tail, std::size_t required) {
  std::ostringstream msg;
  msg << "tail {S > " << tail.threshold << "} at q = " << tail.q << " has " << tail.tail_count()
      << " rows, need at least " << required;
  throw DegenerateTailError(msg.str(), tail.threshold);
}

AllocationReport fallback_report(const dist::SampleMatrix& m, const TailSelection& tail,
                                 const AllocationOptions& options) {
  AllocationReport report;
  report.q = tail.q;
  report.var_s = report.cte_s = report.gte_s = tail.threshold;
  report.degenerate_fallback = true;
  report.kappa = options.kappa;
  double total = 0.0;
  for (double v : m.row_sums()) total += v;
  if (!(total > 0.0)) throw DegenerateTailError("aggregate loss is identically zero", tail.threshold);
  for (std::size_t i = 0; i < m.units(); ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < m.rows(); ++j) col += m(j, i);
    UnitAllocation u;
    u.r = u.r_tilde = col / total;
    if (options.kappa) u.kappa_share = *options.kappa * u.r;
    report.units.push_back(u);
  }
  return report;
}

}  // namespace

AllocationReport allocations(const dist::SampleMatrix& m, double q, const AllocationOptions& options) {
  const TailSelection tail = select_tail(m.row_sums(), q);
  if (tail.indices.empty() && options.policy == TailPolicy::ConventionFallback) {
    return fallback_report(m, tail, options);
  }
  const std::size_t required = std::max<std::size_t>(1, options.min_tail_count);
  if (tail.tail_count() < required) empty_tail(tail, required);

  const TailSums all = sum_tail(m, tail, 1);
  const auto batches = sum_tail_batches(m, tail, 1, options.n_batches);
  const auto s = m.row_sums();

  AllocationReport report;
  report.q = q;
  report.var_s = tail.threshold;
  report.tail_count = tail.tail_count();
  report.cte_s = all.s / static_cast<double>(all.count);
  double log_sum = 0.0;
  for (std::size_t j : tail.indices) log_sum += std::log(s[j]);
  report.gte_s = std::exp(log_sum / static_cast<double>(all.count));
  report.kappa = options.kappa;

  for (std::size_t i = 0; i < m.units(); ++i) {
    UnitAllocation u;
    u.r = all.r(i);
    u.r_tilde = all.r_tilde(i);
    u.cond_cov = all.cov(i);
    u.identity_residual = u.r - u.r_tilde - u.cond_cov / report.cte_s;
    u.r_se = batch_se(batches, [i](const TailSums& b) { return b.r(i); });
    u.r_tilde_se = batch_se(batches, [i](const TailSums& b) { return b.r_tilde(i); });
    u.cond_cov_se = batch_se(batches, [i](const TailSums& b) { return b.cov(i); });
    u.gap_se = batch_se(batches, [i](const TailSums& b) { return b.r(i) - b.r_tilde(i); });
    if (options.kappa) u.kappa_share = *options.kappa * u.r;
    report.units.push_back(u);
  }
  return report;
}

double cond_cov(const dist::SampleMatrix& m, double q, std::size_t unit) {
  check_unit(m, unit);
  const TailSelection tail = select_tail(m.row_sums(), q);
  if (tail.indices.empty()) empty_tail(tail, 1);
  return sum_tail(m, tail, 1).cov(unit);
}

KthAllocations kth_allocations(const dist::SampleMatrix& m, double q, int k, std::size_t n_batches) {
  if (k < 1) throw DomainError("allocation order k must be a positive integer");
  const TailSelection tail = select_tail(m.row_sums(), q);
  if (tail.indices.empty()) empty_tail(tail, 1);

  const TailSums all = sum_tail(m, tail, k);
  const auto batches = sum_tail_batches(m, tail, k, n_batches);
  KthAllocations out;
  out.k = k;
  out.q = q;
  out.tail_count = tail.tail_count();
  for (std::size_t i = 0; i < m.units(); ++i) {
    out.r.push_back(all.r(i));
    out.r_tilde.push_back(all.r_tilde(i));
    out.r_se.push_back(batch_se(batches, [i](const TailSums& b) { return b.r(i); }));
    out.r_tilde_se.push_back(batch_se(batches, [i](const TailSums& b) { return b.r_tilde(i); }));
    out.gap_se.push_back(batch_se(batches, [i](const TailSums& b) { return b.r(i) - b.r_tilde(i); }));
  }
  return out;
}

double gte_gradient_fd(const dist::SampleMatrix& m, double q, std::size_t unit, double h) {
  check_unit(m, unit);
  if (!(h > 0.0 && h <= 0.1)) throw DomainError("finite-difference step must lie in (0, 0.1]");
  const auto s = m.row_sums();
  std::vector<double> up(s.size());
  std::vector<double> down(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    up[j] = s[j] + h * m(j, unit);
    down[j] = s[j] - h * m(j, unit);
  }
  return (gte(up, q) - gte(down, q)) / (2.0 * h);
}

double gte_gradient_fd(const dist::PortfolioSpec& spec, double q, std::size_t unit, double h, std::size_t n,
                       std::uint64_t seed) {
  return gte_gradient_fd(dist::sample_portfolio(spec, n, seed), q, unit, h);
}

}  // namespace riskalloc::measures
