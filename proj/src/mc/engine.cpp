#include "riskalloc/mc/engine.hpp"

#include <vector>

#include "riskalloc/errors.hpp"

namespace riskalloc::mc {

void McConfig::validate() const {
  if (n_batches < 2) throw DomainError("Monte Carlo configuration needs at least 2 batches");
  if (n_samples < n_batches) throw DomainError("Monte Carlo configuration has fewer samples than batches");
}

Estimate batched_estimate(const Statistic& f, const McConfig& cfg, const dist::PortfolioSpec& spec) {
  cfg.validate();
  dist::validate(spec);
  const std::size_t per_batch = cfg.effective_samples() / cfg.n_batches;
  const std::size_t units = dist::unit_count(spec);

  std::vector<double> stats(cfg.n_batches, 0.0);
  std::vector<char> ok(cfg.n_batches, 0);
  // Batches already parallelize over rows inside sample_rows; here they run in order.
  for (std::size_t b = 0; b < cfg.n_batches; ++b) {
    auto rows = dist::sample_rows(spec, b * per_batch, per_batch, cfg.seed, cfg.stream_id);
    dist::SampleMatrix batch(std::move(rows), units, cfg.seed, spec);
    try {
      stats[b] = f(batch);
      ok[b] = 1;
    } catch (const Error&) {
      ok[b] = 0;
    }
  }

  std::vector<double> good;
  for (std::size_t b = 0; b < cfg.n_batches; ++b)
    if (ok[b]) good.push_back(stats[b]);
  const std::size_t failed = cfg.n_batches - good.size();
  if (5 * failed > cfg.n_batches) {
    throw AggregationError("statistic failed on " + std::to_string(failed) + " of " +
                           std::to_string(cfg.n_batches) + " batches");
  }
  const BatchSummary summary = summarize_batches(good);
  return Estimate{summary.mean, summary.std_error, good.size() * per_batch};
}

std::pair<dist::SampleMatrix, dist::SampleMatrix> crn_pair(const dist::PortfolioSpec& a,
                                                           const dist::PortfolioSpec& b, const McConfig& cfg) {
  cfg.validate();
  if (dist::unit_count(a) != dist::unit_count(b)) {
    throw ParameterError("common-random-number pair needs equal unit counts");
  }
  const std::size_t n = cfg.effective_samples();
  return {dist::sample_portfolio(a, n, cfg.seed, cfg.stream_id),
          dist::sample_portfolio(b, n, cfg.seed, cfg.stream_id)};
}

dist::SampleMatrix sample_merged(const dist::PortfolioSpec& x, const dist::PortfolioSpec& y,
                                 const McConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.effective_samples();
  const auto sx = dist::sample_portfolio(x, n, cfg.seed, cfg.stream_id);
  const auto sy = dist::sample_portfolio(y, n, cfg.seed, cfg.stream_id + 1);
  const std::size_t ux = sx.units();
  const std::size_t uy = sy.units();
  std::vector<double> data(n * (ux + uy));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < ux; ++i) data[r * (ux + uy) + i] = sx(r, i);
    for (std::size_t i = 0; i < uy; ++i) data[r * (ux + uy) + ux + i] = sy(r, i);
  }
  return dist::SampleMatrix(std::move(data), ux + uy, cfg.seed);
}

dist::SampleMatrix sample_amalgamated(const dist::PortfolioSpec& x, const dist::PortfolioSpec& y,
                                      const McConfig& cfg) {
  cfg.validate();
  if (dist::unit_count(x) != dist::unit_count(y)) {
    throw ParameterError("amalgamation needs portfolios with equal unit counts");
  }
  const std::size_t n = cfg.effective_samples();
  const auto sx = dist::sample_portfolio(x, n, cfg.seed, cfg.stream_id);
  const auto sy = dist::sample_portfolio(y, n, cfg.seed, cfg.stream_id + 1);
  std::vector<double> data(n * sx.units());
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = sx.data()[k] + sy.data()[k];
  return dist::SampleMatrix(std::move(data), sx.units(), cfg.seed);
}

}  // namespace riskalloc::mc
