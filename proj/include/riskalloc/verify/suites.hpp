#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskalloc/dist/portfolio.hpp"

namespace riskalloc::verify {

/// One checked statement. pass compares value against bound; how depends on
/// the assertion and is spelled out in detail.
struct Assertion {
  std::string suite;
  std::string name;
  bool pass = false;
  double value = 0.0;
  double bound = 0.0;
  std::string detail;
};

struct SuiteConfig {
  std::size_t n = 1000000;
  std::uint64_t seed = 1;
  /// Replaces the built-in portfolio list for suites that take one
  /// (tail-bounds, covariance-identity).
  std::optional<dist::PortfolioSpec> portfolio;
};

/// tail-bounds, covariance-identity, liouville, uniform-k2,
/// gamma-independence, gte-gradient
const std::vector<std::string>& suite_names();

/// Throws DomainError for an unknown suite.
std::vector<Assertion> run_suite(const std::string& name, const SuiteConfig& config);

void write_table(std::ostream& out, const std::vector<Assertion>& rows);
nlohmann::json to_json(const std::vector<Assertion>& rows);

/// Levels used when none are given: 0, 0.5, 0.9, 0.95, 0.99.
const std::vector<double>& default_q_grid();

/// Positive-support portfolios covering every implemented family.
std::vector<std::pair<std::string, dist::PortfolioSpec>> portfolio_zoo();

}  // namespace riskalloc::verify
