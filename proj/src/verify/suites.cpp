#include "riskalloc/verify/suites.hpp"

#include <cmath>
#include <algorithm>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "riskalloc/dist/sample.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/measures/allocation.hpp"
#include "riskalloc/measures/report_io.hpp"
#include "riskalloc/membership/checks.hpp"
#include "riskalloc/membership/laplace.hpp"
#include "riskalloc/membership/lukacs.hpp"

namespace riskalloc::verify {
namespace {

using dist::Gamma;
using dist::Independent;
using dist::PortfolioSpec;

std::string fmt(double v) { return measures::format_number(v); }

std::string label(const std::string& portfolio, double q) {
  return portfolio + " q=" + fmt(q);
}

std::vector<std::pair<std::string, PortfolioSpec>> chosen(const SuiteConfig& cfg) {
  if (cfg.portfolio) return {{"portfolio", *cfg.portfolio}};
  return portfolio_zoo();
}

std::vector<Assertion> tail_bounds(const SuiteConfig& cfg) {
  std::vector<Assertion> out;
  for (const auto& [name, spec] : chosen(cfg)) {
    const auto m = dist::sample_portfolio(spec, cfg.n, cfg.seed);
    for (double q : default_q_grid()) {
      const auto rep = measures::allocations(m, q);
      Assertion a;
      a.name = label(name, q) + ": VaR <= GTE <= CTE";
      a.pass = rep.var_s <= rep.gte_s && rep.gte_s <= rep.cte_s;
      a.value = rep.gte_s;
      a.bound = rep.cte_s;
      a.detail = "VaR=" + fmt(rep.var_s) + " GTE=" + fmt(rep.gte_s) + " CTE=" + fmt(rep.cte_s);
      out.push_back(std::move(a));
    }
  }
  return out;
}

std::vector<Assertion> covariance_identity(const SuiteConfig& cfg) {
  constexpr double kTol = 1e-10;
  std::vector<Assertion> out;
  auto add = [&](std::string name, double value, std::string detail) {
    out.push_back({"", std::move(name), std::abs(value) < kTol, std::abs(value), kTol, std::move(detail)});
  };
  for (const auto& [name, spec] : chosen(cfg)) {
    const auto m = dist::sample_portfolio(spec, cfg.n, cfg.seed);
    for (double q : default_q_grid()) {
      const auto rep = measures::allocations(m, q);
      double worst = 0.0;
      double sum_r = 0.0;
      double sum_rt = 0.0;
      double sum_cov = 0.0;
      for (const auto& u : rep.units) {
        worst = std::max(worst, std::abs(u.identity_residual));
        sum_r += u.r;
        sum_rt += u.r_tilde;
        sum_cov += u.cond_cov;
      }
      const std::string l = label(name, q);
      add(l + ": max |r - r_tilde - cov/CTE|", worst, "per-unit residual on one tail selection");
      add(l + ": sum r - 1", sum_r - 1.0, "");
      add(l + ": sum r_tilde - 1", sum_rt - 1.0, "");
      add(l + ": sum cov", sum_cov, "");
      add(l + ": sum GTE r_tilde - GTE", rep.gte_s * sum_rt - rep.gte_s, "GTE=" + fmt(rep.gte_s));
    }
  }
  return out;
}

std::vector<Assertion> liouville(const SuiteConfig& cfg) {
  struct Case {
    std::string name;
    PortfolioSpec spec;
    std::vector<double> shapes;
  };
  const std::vector<Case> cases{
      {"inverted-dirichlet(1,2,3; 5)", dist::InvertedDirichlet{{1, 2, 3}, 5}, {1, 2, 3}},
      {"liouville(1,2; gamma(2,1.5))", dist::Liouville{{1, 2}, Gamma{2, 1.5}}, {1, 2}},
      {"liouville(1,1,2; inverted-beta(3,4))", dist::Liouville{{1, 1, 2}, dist::InvertedBeta{3, 4}}, {1, 1, 2}},
  };
  const auto grid = membership::default_t_grid();
  std::vector<Assertion> out;
  for (const auto& c : cases) {
    const auto m = dist::sample_portfolio(c.spec, cfg.n, cfg.seed);
    const auto v = membership::check_main(m, grid, membership::kDefaultSigmaMult);
    out.push_back({"", c.name + ": size-biased sums agree", v.pass, v.worst_gap, v.threshold,
                   "worst t=" + fmt(v.worst_t) + " (standardized gap)"});
    double total = 0.0;
    for (double g : c.shapes) total += g;
    for (double q : {0.0, 0.5, 0.9, 0.95}) {
      const auto rep = measures::allocations(m, q);
      for (std::size_t i = 0; i < c.shapes.size(); ++i) {
        const double target = c.shapes[i] / total;
        const auto& u = rep.units[i];
        const std::string l = label(c.name, q) + " unit " + std::to_string(i + 1);
        out.push_back({"", l + ": r within 3 SE of share", std::abs(u.r - target) <= 3 * u.r_se,
                       std::abs(u.r - target), 3 * u.r_se, "r=" + fmt(u.r) + " share=" + fmt(target)});
        out.push_back({"", l + ": r_tilde within 3 SE of share", std::abs(u.r_tilde - target) <= 3 * u.r_tilde_se,
                       std::abs(u.r_tilde - target), 3 * u.r_tilde_se,
                       "r_tilde=" + fmt(u.r_tilde) + " share=" + fmt(target)});
      }
    }
  }
  return out;
}

// E[X_1^2 | X_1 + X_2 = s] for iid Uniform(0,1).
double uniform_second_moment(double s) {
  if (s <= 1.0) return s * s / 3.0;
  const double a = s - 1.0;
  return (1.0 - a * a * a) / (3.0 * (2.0 - s));
}

std::vector<Assertion> uniform_k2(const SuiteConfig& cfg) {
  const PortfolioSpec spec = dist::IidExchangeable{dist::Uniform{0, 1}, 2};
  const auto m = dist::sample_portfolio(spec, cfg.n, cfg.seed);
  std::vector<Assertion> out;

  const auto v = membership::check_wk_necessary(m, 2, membership::default_t_grid());
  out.push_back({"", "order-2 size-biased sums agree", v.pass, v.worst_gap, v.threshold,
                 "standardized gap, necessary condition only"});

  const auto k2 = measures::kth_allocations(m, 0.9, 2);
  const double gap = std::abs(k2.r[0] - k2.r_tilde[0]);
  out.push_back({"", "q=0.9: |r^2 - r_tilde^2| beyond 3 paired SE", gap > 3 * k2.gap_se[0], gap, 3 * k2.gap_se[0],
                 "r^2=" + fmt(k2.r[0]) + " r_tilde^2=" + fmt(k2.r_tilde[0])});

  // Conditional second moment on 20 equal-count bins of S. The oracle is the
  // closed form averaged over the same rows, so bin width does not bias it.
  const auto s = m.row_sums();
  std::vector<std::size_t> order(s.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s[a] < s[b]; });
  constexpr std::size_t kBins = 20;
  double worst = 0.0;
  std::size_t worst_bin = 0;
  for (std::size_t b = 0; b < kBins; ++b) {
    const std::size_t lo = order.size() * b / kBins;
    const std::size_t hi = order.size() * (b + 1) / kBins;
    double emp = 0.0;
    double oracle = 0.0;
    for (std::size_t r = lo; r < hi; ++r) {
      const std::size_t j = order[r];
      emp += m(j, 0) * m(j, 0);
      oracle += uniform_second_moment(s[j]);
    }
    const double rel = std::abs(emp - oracle) / oracle;
    if (rel > worst) {
      worst = rel;
      worst_bin = b;
    }
  }
  out.push_back({"", "E[X_1^2 | S] profile within 2% on 20 bins", worst <= 0.02, worst, 0.02,
                 "worst bin " + std::to_string(worst_bin + 1)});
  return out;
}

std::vector<Assertion> gamma_independence(const SuiteConfig& cfg) {
  std::vector<Assertion> out;
  membership::LukacsOptions opts;
  opts.n_samples = cfg.n;
  opts.seed = cfg.seed;
  const auto good = membership::lukacs_check({Gamma{1, 2}, Gamma{3, 2}}, opts);
  out.push_back({"", "gamma(1,2)+gamma(3,2): classified in both sets", good.classification.pass,
                 good.classification.worst_gap, good.classification.threshold, good.classification.reason});
  out.push_back({"", "gamma(1,2)+gamma(3,2): R_1 and S look independent", good.diagnostic->consistent,
                 good.diagnostic->p_value, good.diagnostic->alpha,
                 "chi-square " + fmt(good.diagnostic->statistic) + " on " + fmt(good.diagnostic->dof) + " dof"});

  opts.n_samples = 0;
  const std::vector<std::pair<std::string, std::vector<dist::MarginalSpec>>> others{
      {"gamma(1,1)+gamma(1,2)", {Gamma{1, 1}, Gamma{1, 2}}},
      {"inverse-gaussian(1)+inverse-gaussian(2)", {dist::InverseGaussian{1}, dist::InverseGaussian{2}}},
      {"negative-binomial(4,0.5)+negative-binomial(2,0.5)",
       {dist::NegativeBinomial{4, 0.5}, dist::NegativeBinomial{2, 0.5}}},
      {"uniform(0,1)+uniform(0,1)", {dist::Uniform{0, 1}, dist::Uniform{0, 1}}},
      {"inverted-beta(2,3)+inverted-beta(4,3)", {dist::InvertedBeta{2, 3}, dist::InvertedBeta{4, 3}}},
  };
  for (const auto& [name, ms] : others) {
    const auto v = membership::lukacs_check(ms, opts);
    out.push_back({"", name + ": not classified in both sets", !v.classification.pass, v.classification.worst_gap,
                   v.classification.threshold, v.classification.reason});
  }

  const auto ig = membership::lukacs_check({dist::InverseGaussian{1}, dist::InverseGaussian{2}}, opts);
  out.push_back({"", "inverse-gaussian(1)+inverse-gaussian(2): first-order condition holds", ig.first_order->pass,
                 ig.first_order->worst_gap, ig.first_order->threshold, ""});
  out.push_back({"", "inverse-gaussian(1)+inverse-gaussian(2): second-order condition fails",
                 !ig.second_order->pass, ig.second_order->worst_gap, ig.second_order->threshold,
                 "worst t=" + fmt(ig.second_order->worst_t)});
  return out;
}

std::vector<Assertion> gte_gradient(const SuiteConfig& cfg) {
  const std::vector<std::pair<std::string, PortfolioSpec>> cases{
      {"inverted-dirichlet(1,2,3; 5)", dist::InvertedDirichlet{{1, 2, 3}, 5}},
      {"gamma(1,1)+gamma(3,1)", Independent{{Gamma{1, 1}, Gamma{3, 1}}}},
  };
  std::vector<Assertion> out;
  for (const auto& [name, spec] : cases) {
    const auto m = dist::sample_portfolio(spec, cfg.n, cfg.seed);
    for (double q : {0.5, 0.9}) {
      const auto rep = measures::allocations(m, q);
      for (std::size_t i = 0; i < m.units(); ++i) {
        const double fd = measures::gte_gradient_fd(m, q, i, 1e-3);
        const double target = rep.gte_s * rep.units[i].r_tilde;
        const double rel = std::abs(fd - target) / target;
        out.push_back({"", label(name, q) + " unit " + std::to_string(i + 1) + ": derivative = GTE r_tilde",
                       rel <= 0.01, rel, 0.01, "fd=" + fmt(fd) + " GTE*r_tilde=" + fmt(target)});
      }
    }
  }
  return out;
}

using SuiteFn = std::function<std::vector<Assertion>(const SuiteConfig&)>;

const std::map<std::string, SuiteFn>& registry() {
  static const std::map<std::string, SuiteFn> suites{
      {"tail-bounds", tail_bounds},   {"covariance-identity", covariance_identity},
      {"liouville", liouville},       {"uniform-k2", uniform_k2},
      {"gamma-independence", gamma_independence}, {"gte-gradient", gte_gradient},
  };
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"tail-bounds", "covariance-identity", "liouville",
                                              "uniform-k2",  "gamma-independence",  "gte-gradient"};
  return names;
}

const std::vector<double>& default_q_grid() {
  static const std::vector<double> grid{0.0, 0.5, 0.9, 0.95, 0.99};
  return grid;
}

std::vector<std::pair<std::string, PortfolioSpec>> portfolio_zoo() {
  return {
      {"gamma(1,2)+gamma(3,2)", Independent{{Gamma{1, 2}, Gamma{3, 2}}}},
      {"gamma(1,1)+gamma(1,3)", Independent{{Gamma{1, 1}, Gamma{1, 3}}}},
      {"inverse-gaussian(1)+inverse-gaussian(2)", Independent{{dist::InverseGaussian{1}, dist::InverseGaussian{2}}}},
      {"negative-binomial(4,0.5)+negative-binomial(2,0.5)",
       Independent{{dist::NegativeBinomial{4, 0.5}, dist::NegativeBinomial{2, 0.5}}}},
      {"uniform(0,1)x2", dist::IidExchangeable{dist::Uniform{0, 1}, 2}},
      {"inverted-beta(2,3)x3", dist::IidExchangeable{dist::InvertedBeta{2, 3}, 3}},
      {"inverted-dirichlet(1,2,3; 5)", dist::InvertedDirichlet{{1, 2, 3}, 5}},
      {"liouville(1,2; gamma(2,1.5))", dist::Liouville{{1, 2}, Gamma{2, 1.5}}},
      {"liouville(1,1,2; inverted-beta(3,4))", dist::Liouville{{1, 1, 2}, dist::InvertedBeta{3, 4}}},
      {"mixed-gamma [[1,2],[2,4]]", dist::MixedGamma{{{1, 2}, {2, 4}}, {1, 1}, {0.5, 0.5}}},
  };
}

std::vector<Assertion> run_suite(const std::string& name, const SuiteConfig& config) {
  const auto& suites = registry();
  auto it = suites.find(name);
  if (it == suites.end()) {
    std::string known;
    for (const auto& n : suite_names()) known += (known.empty() ? "" : ", ") + n;
    throw DomainError("unknown suite '" + name + "' (known: " + known + ")");
  }
  auto rows = it->second(config);
  for (auto& r : rows) r.suite = name;
  return rows;
}

void write_table(std::ostream& out, const std::vector<Assertion>& rows) {
  std::size_t passed = 0;
  for (const auto& r : rows) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  value=" << fmt(r.value) << " bound=" << fmt(r.bound);
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << '\n';
    passed += r.pass ? 1 : 0;
  }
  out << passed << "/" << rows.size() << " assertions passed\n";
}

nlohmann::json to_json(const std::vector<Assertion>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"suite", r.suite},
                   {"name", r.name},
                   {"pass", r.pass},
                   {"value", std::isfinite(r.value) ? nlohmann::json(r.value) : nlohmann::json(nullptr)},
                   {"bound", std::isfinite(r.bound) ? nlohmann::json(r.bound) : nlohmann::json(nullptr)},
                   {"detail", r.detail}});
  }
  return arr;
}

}  // namespace riskalloc::verify
