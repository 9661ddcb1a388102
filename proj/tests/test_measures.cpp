#include <doctest.h>

#include <cmath>
#include <locale>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "oracles.hpp"
#include "riskalloc/dist/rng.hpp"
#include "riskalloc/dist/sample.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/measures/allocation.hpp"
#include "riskalloc/measures/report_io.hpp"
#include "riskalloc/measures/tail.hpp"

using namespace riskalloc;
using namespace riskalloc::measures;
using dist::Gamma;
using dist::PortfolioSpec;

namespace {

// Tail mean of values with a fixed threshold, with a 50-batch standard error.
std::pair<double, double> tail_mean_with_se(const std::vector<double>& v, double threshold) {
  std::vector<double> num(v.size()), den(v.size());
  double a = 0.0, c = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const bool in = v[j] > threshold;
    num[j] = in ? v[j] : 0.0;
    den[j] = in ? 1.0 : 0.0;
    a += num[j];
    c += den[j];
  }
  return {a / c, oracle::ratio_std_error(num, den)};
}

}  // namespace

TEST_SUITE("measures") {
  TEST_CASE("value at risk") {
    const std::vector<double> s{4, 1, 3, 2};
    CHECK(var_q(s, 0.0) == 1.0);
    CHECK(var_q(s, 0.5) == 2.0);
    CHECK(var_q(s, 0.51) == 3.0);
    CHECK(var_q(s, 0.99) == 4.0);
    const std::vector<double> c{5, 5, 5};
    for (double q : {0.0, 0.3, 0.9}) CHECK(var_q(c, q) == 5.0);
    CHECK_THROWS_AS(var_q(std::vector<double>{}, 0.5), DomainError);
    CHECK_THROWS_AS(var_q(s, 1.0), DomainError);
    CHECK_THROWS_AS(var_q(s, -0.1), DomainError);
  }

  TEST_CASE("conditional tail expectation") {
    const std::vector<double> s{1, 2, 3, 4};
    CHECK(cte(s, 0.5) == 3.5);
    const std::vector<double> c{7, 7, 7};
    try {
      cte(c, 0.5);
      FAIL("expected a degenerate tail");
    } catch (const DegenerateTailError& e) {
      CHECK(e.convention_value() == 7.0);
    }
    CHECK(cte(c, 0.5, TailPolicy::ConventionFallback) == 7.0);
    CHECK(gte(c, 0.5, TailPolicy::ConventionFallback) == 7.0);
  }

  TEST_CASE("CTE of Gamma(2,1) against the incomplete-gamma oracle") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::Independent{{Gamma{2, 1}}}}, 1000000, 1);
    const std::vector<double> s(m.row_sums().begin(), m.row_sums().end());
    const double sq = var_q(s, 0.9);
    const double oracle_cte = boost::math::tgamma(3.0, sq) / boost::math::tgamma(2.0, sq);
    const auto [mean, se] = tail_mean_with_se(s, sq);
    CHECK(cte(s, 0.9) == doctest::Approx(mean).epsilon(1e-12));
    CHECK(std::abs(cte(s, 0.9) - oracle_cte) <= 3.0 * se);
  }

  TEST_CASE("geometric tail expectation") {
    const double e = std::exp(1.0);
    const std::vector<double> two{e, e * e * e};
    CHECK(geometric_mean(two) == doctest::Approx(std::exp(2.0)));
    // The strict tail at q = 0 drops the minimum.
    CHECK(gte(two, 0.0) == doctest::Approx(e * e * e));
    const std::vector<double> c{3, 3, 3, 3};
    CHECK(geometric_mean(c) == doctest::Approx(3.0));
    const std::vector<double> negative{-3, -2, -1};
    CHECK_THROWS_AS(gte(negative, 0.0), DomainError);
    CHECK_THROWS_AS(geometric_mean(std::vector<double>{1.0, 0.0}), DomainError);
  }

  TEST_CASE("GTE of a lognormal sample") {
    const std::size_t n = 1000000;
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) {
      dist::CounterRng rng(21, 0, j);
      s[j] = std::exp(rng.normal());
    }
    boost::math::normal_distribution<double> z;
    const double zq = boost::math::quantile(z, 0.9);
    const double target = boost::math::pdf(z, zq) / 0.1;
    CHECK(target == doctest::Approx(1.754983).epsilon(1e-6));
    std::vector<double> logs(n);
    for (std::size_t j = 0; j < n; ++j) logs[j] = std::log(s[j]);
    const auto [mean_log, se] = tail_mean_with_se(logs, std::log(var_q(s, 0.9)));
    CHECK(std::log(gte(s, 0.9)) == doctest::Approx(mean_log).epsilon(1e-12));
    CHECK(std::abs(std::log(gte(s, 0.9)) - target) <= 3.0 * se);
  }

  TEST_CASE("inverted Dirichlet allocations equal the shape shares") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::InvertedDirichlet{{1, 2, 3}, 5}}, 1000000, 1);
    for (double q : {0.0, 0.5, 0.9}) {
      const auto rep = allocations(m, q);
      for (std::size_t i = 0; i < 3; ++i) {
        CAPTURE(q);
        CAPTURE(i);
        const double share = (i + 1) / 6.0;
        CHECK(std::abs(rep.units[i].r - share) <= 3.0 * rep.units[i].r_se);
        CHECK(std::abs(rep.units[i].r_tilde - share) <= 3.0 * rep.units[i].r_tilde_se);
      }
    }
  }

  TEST_CASE("common-scale gammas allocate by mean") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::Independent{{Gamma{1, 2}, Gamma{3, 2}}}}, 1000000, 1);
    const auto rep = allocations(m, 0.95);
    const double share[] = {0.25, 0.75};
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(std::abs(rep.units[i].r - share[i]) <= 3.0 * rep.units[i].r_se);
      CHECK(std::abs(rep.units[i].r_tilde - share[i]) <= 3.0 * rep.units[i].r_tilde_se);
    }
  }

  TEST_CASE("Gamma(1,1) + Gamma(1,3): allocations differ and match quadrature") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::Independent{{Gamma{1, 1}, Gamma{1, 3}}}}, 1000000, 1);
    const auto rep = allocations(m, 0.9);
    const auto& u = rep.units[0];
    CHECK(std::abs(u.r - u.r_tilde) > 3.0 * u.gap_se);
    const auto o = oracle::exp_pair(0.9);
    CHECK(u.r == doctest::Approx(o.r).epsilon(0.01));
    CHECK(u.r_tilde == doctest::Approx(o.r_tilde).epsilon(0.01));
  }

  TEST_CASE("conditional covariance") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::Independent{{Gamma{1, 1}, Gamma{1, 3}}}}, 1000000, 2);
    const auto o = oracle::exp_pair(0.0);
    CHECK(o.cov < 0.0);
    const auto rep = allocations(m, 0.0);
    CHECK(rep.units[0].cond_cov < 0.0);
    CHECK(std::abs(rep.units[0].cond_cov - o.cov) <= 3.0 * rep.units[0].cond_cov_se);
    CHECK(cond_cov(m, 0.0, 0) == rep.units[0].cond_cov);
    CHECK(std::abs(rep.units[0].cond_cov + rep.units[1].cond_cov) < 1e-10);
    CHECK_THROWS_AS(cond_cov(m, 0.0, 2), DomainError);

    const auto iid = dist::sample_portfolio(PortfolioSpec{dist::IidExchangeable{dist::InverseGaussian{1}, 3}}, 1000000, 2);
    for (double q : {0.0, 0.5, 0.9}) {
      const auto r = allocations(iid, q);
      for (const auto& unit : r.units) CHECK(std::abs(unit.cond_cov) <= 3.0 * unit.cond_cov_se);
    }
  }

  TEST_CASE("k-th order allocations") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::Liouville{{1, 2, 0.5}, Gamma{2, 1}}}, 100000, 3);
    for (double q : {0.0, 0.5, 0.95}) {
      const auto rep = allocations(m, q);
      const auto k1 = kth_allocations(m, q, 1);
      for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(k1.r[i] - rep.units[i].r) <= 1e-12);
        CHECK(std::abs(k1.r_tilde[i] - rep.units[i].r_tilde) <= 1e-12);
      }
    }
    CHECK_THROWS_AS(kth_allocations(m, 0.5, 0), DomainError);

    const auto u = dist::sample_portfolio(PortfolioSpec{dist::IidExchangeable{dist::Uniform{0, 1}, 2}}, 1000000, 1);
    const auto k2 = kth_allocations(u, 0.9, 2);
    CHECK(std::abs(k2.r[0] - k2.r_tilde[0]) > 3.0 * k2.gap_se[0]);
    // Second-order shares do not sum to one.
    CHECK(std::abs(k2.r[0] + k2.r[1] - 1.0) > 0.1);

    // E[X_1^2 | S = s] = s^2 / 3 on [0, 1]; check near s = 0.5.
    double sum = 0.0;
    std::vector<double> vals;
    for (std::size_t j = 0; j < u.rows(); ++j) {
      if (std::abs(u.row_sums()[j] - 0.5) < 0.01) vals.push_back(u(j, 0) * u(j, 0));
    }
    for (double v : vals) sum += v;
    CHECK(0.5 * 0.5 / 3.0 == doctest::Approx(0.0833333).epsilon(1e-5));
    CHECK(std::abs(sum / vals.size() - 0.25 / 3.0) <= 3.0 * oracle::std_error(vals) + 1e-4);
  }

  TEST_CASE("generalized weighted risk measure") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::Independent{{Gamma{2, 1}, Gamma{0.5, 3}}}}, 100000, 4);
    const auto s = m.row_sums();
    auto id = [](double x) { return x; };
    double mean = 0.0;
    for (double v : s) mean += v;
    mean /= s.size();
    CHECK(weighted_risk_measure(id, [](double) { return 1.0; }, s) == doctest::Approx(mean).epsilon(1e-12));
    for (double q : {0.0, 0.5, 0.9, 0.99}) {
      CHECK(std::abs(weighted_risk_measure(id, tail_indicator(s, q), s) - cte(s, q)) <= 1e-12 * cte(s, q));
      const auto tail = select_tail(s, q);
      double s2 = 0.0;
      for (std::size_t j : tail.indices) s2 += s[j] * s[j];
      const double w2 = weighted_risk_measure([](double x) { return x * x; }, tail_indicator(s, q), s);
      CHECK(w2 == doctest::Approx(s2 / tail.tail_count()).epsilon(1e-12));
    }
    CHECK_THROWS_AS(weighted_risk_measure(id, [](double) { return 0.0; }, s), DegenerateWeightsError);
  }

  TEST_CASE("GTE gradient by finite differences") {
    const PortfolioSpec single = dist::Independent{{Gamma{2, 1}}};
    const auto one = dist::sample_portfolio(single, 200000, 5);
    const double g = gte(one.row_sums(), 0.9);
    CHECK(gte_gradient_fd(one, 0.9, 0, 1e-3) == doctest::Approx(g).epsilon(0.005));

    const PortfolioSpec id = dist::InvertedDirichlet{{1, 2, 3}, 5};
    const auto m = dist::sample_portfolio(id, 1000000, 6);
    const double gid = gte(m.row_sums(), 0.5);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(gte_gradient_fd(id, 0.5, i, 1e-3, 1000000, 6) == doctest::Approx(gid * (i + 1) / 6.0).epsilon(0.01));
    }

    const auto gam = dist::sample_portfolio(PortfolioSpec{dist::Independent{{Gamma{1, 1}, Gamma{3, 1}}}}, 1000000, 7);
    const auto rep = allocations(gam, 0.9);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(gte_gradient_fd(gam, 0.9, i, 1e-3) == doctest::Approx(rep.gte_s * rep.units[i].r_tilde).epsilon(0.01));
    }
    CHECK_THROWS_AS(gte_gradient_fd(gam, 0.9, 0, 0.0), DomainError);
    CHECK_THROWS_AS(gte_gradient_fd(gam, 0.9, 0, 0.2), DomainError);
    CHECK_THROWS_AS(gte_gradient_fd(gam, 0.9, 5, 1e-3), DomainError);
  }

  TEST_CASE("allocation invariants on random matrices") {
    // Property sweep: shapes, sizes and levels drawn from a fixed generator.
    dist::CounterRng gen(99, 7, 0);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t units = 1 + static_cast<std::size_t>(gen.uniform() * 5);
      const std::size_t rows = 2 + static_cast<std::size_t>(gen.uniform() * 400);
      std::vector<double> data(rows * units);
      for (auto& v : data) v = std::pow(gen.uniform(), 3.0) * 10.0 + 1e-9;
      const dist::SampleMatrix m(std::move(data), units);
      const double q = std::floor(gen.uniform() * 100) / 100.0;
      AllocationReport rep;
      try {
        rep = allocations(m, q);
      } catch (const DegenerateTailError&) {
        continue;
      }
      CAPTURE(trial);
      // A one-row tail gives GTE = exp(log x), equal to CTE up to rounding.
      CHECK(rep.var_s <= rep.gte_s * (1 + 1e-14));
      CHECK(rep.gte_s <= rep.cte_s * (1 + 1e-14));
      double sr = 0.0, srt = 0.0, sc = 0.0;
      for (const auto& u : rep.units) {
        CHECK(std::abs(u.identity_residual) < 1e-10);
        sr += u.r;
        srt += u.r_tilde;
        sc += u.cond_cov;
      }
      CHECK(std::abs(sr - 1.0) < 1e-10);
      CHECK(std::abs(srt - 1.0) < 1e-10);
      CHECK(std::abs(sc) < 1e-10);
      CHECK(std::abs(rep.gte_s * srt - rep.gte_s) < 1e-10);
      if (rows < 100) CHECK(std::isnan(rep.units[0].r_se));
    }
  }

  TEST_CASE("ratio rows lie on the simplex") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::MixedGamma{{{1, 2}, {2, 0.3}, {1, 1}}, {1, 2, 3}, {0.5, 0.5}}},
                                          20000, 8);
    for (std::size_t j = 0; j < m.rows(); ++j) {
      double total = 0.0;
      for (std::size_t i = 0; i < 3; ++i) {
        const double r = m(j, i) / m.row_sums()[j];
        REQUIRE(r >= 0.0);
        REQUIRE(r <= 1.0);
        total += r;
      }
      REQUIRE(std::abs(total - 1.0) <= 1e-12);
    }
  }

  TEST_CASE("degenerate tails") {
    const dist::SampleMatrix constant({1.0, 3.0, 1.0, 3.0, 1.0, 3.0}, 2);
    CHECK_THROWS_AS(allocations(constant, 0.5), DegenerateTailError);
    AllocationOptions opts;
    opts.policy = TailPolicy::ConventionFallback;
    opts.kappa = 100.0;
    const auto rep = allocations(constant, 0.5, opts);
    CHECK(rep.degenerate_fallback);
    CHECK(rep.cte_s == 4.0);
    CHECK(rep.gte_s == 4.0);
    CHECK(rep.units[0].r == doctest::Approx(0.25));
    CHECK(rep.units[1].r_tilde == doctest::Approx(0.75));
    CHECK(*rep.units[1].kappa_share == doctest::Approx(75.0));

    const auto m = dist::sample_portfolio(PortfolioSpec{dist::Independent{{Gamma{2, 1}}}}, 10000, 1);
    AllocationOptions guard;
    guard.min_tail_count = 1000;
    CHECK_NOTHROW(allocations(m, 0.9, guard));
    CHECK_THROWS_AS(allocations(m, 0.95, guard), DegenerateTailError);
    CHECK_THROWS_AS(allocations(m, 1.0), DomainError);
  }

  TEST_CASE("CSV output") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::InvertedDirichlet{{1, 2}, 3}}, 5000, 1);
    const std::vector<AllocationReport> reps{allocations(m, 0.0), allocations(m, 0.5)};

    struct Comma : std::numpunct<char> {
      char do_decimal_point() const override { return ','; }
    };
    std::ostringstream out;
    out.imbue(std::locale(std::locale::classic(), new Comma));
    write_csv(out, reps);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "q,unit,r,r_se,r_tilde,r_tilde_se,cond_cov,identity_residual");
    int rows = 0;
    while (std::getline(lines, line)) {
      ++rows;
      CHECK(std::count(line.begin(), line.end(), ',') == 7);
    }
    CHECK(rows == 4);
    CHECK(out.str().find("0.5,2,") != std::string::npos);
    CHECK(format_number(NAN) == "nan");
    CHECK(format_number(0.1) == "0.1");
  }

  TEST_CASE("JSON round trip") {
    const auto m = dist::sample_portfolio(PortfolioSpec{dist::InvertedDirichlet{{1, 2, 3}, 4}}, 20000, 1);
    AllocationOptions opts;
    opts.kappa = 10.0;
    for (double q : {0.0, 0.9}) {
      const auto rep = allocations(m, q, opts);
      const auto back = report_from_json(nlohmann::json::parse(to_json(rep).dump()));
      CHECK(back.q == rep.q);
      CHECK(back.var_s == rep.var_s);
      CHECK(back.cte_s == rep.cte_s);
      CHECK(back.gte_s == rep.gte_s);
      CHECK(back.tail_count == rep.tail_count);
      CHECK(*back.kappa == 10.0);
      REQUIRE(back.units.size() == rep.units.size());
      for (std::size_t i = 0; i < rep.units.size(); ++i) {
        CHECK(back.units[i].r == rep.units[i].r);
        CHECK(back.units[i].r_se == rep.units[i].r_se);
        CHECK(back.units[i].r_tilde == rep.units[i].r_tilde);
        CHECK(back.units[i].cond_cov == rep.units[i].cond_cov);
        CHECK(back.units[i].gap_se == rep.units[i].gap_se);
        CHECK(back.units[i].identity_residual == rep.units[i].identity_residual);
        CHECK(*back.units[i].kappa_share == *rep.units[i].kappa_share);
      }
    }
    const dist::SampleMatrix tiny({1, 2, 3, 4, 5, 6}, 2);
    const auto small = allocations(tiny, 0.0);
    const auto back = report_from_json(to_json(small));
    CHECK(std::isnan(back.units[0].r_se));
  }
}
