#include "riskalloc/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "riskalloc/dist/json_io.hpp"
#include "riskalloc/dist/sample.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/measures/allocation.hpp"
#include "riskalloc/measures/report_io.hpp"
#include "riskalloc/membership/checks.hpp"
#include "riskalloc/membership/laplace.hpp"
#include "riskalloc/membership/lukacs.hpp"
#include "riskalloc/verify/suites.hpp"

namespace riskalloc::cli {
namespace {

using nlohmann::json;

constexpr std::size_t kMinSamples = 10000;
constexpr std::size_t kMinTailRows = 1000;

struct Options {
  std::string portfolio;
  std::string q_list;
  std::size_t n = 1000000;
  std::uint64_t seed = 1;
  std::string out;
  std::string format;
  std::string criterion;
  std::string suite;
  std::optional<double> tol;
  double sigma = membership::kDefaultSigmaMult;
  int k = 2;
  std::size_t unit = 0;
  double h = 1e-3;
  std::optional<double> kappa;
};

// Thrown for bad flags; mapped to the usage exit code.
struct UsageError : Error {
  using Error::Error;
};

std::vector<double> parse_levels(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, end - pos);
    double v = 0.0;
    auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw UsageError("--q: cannot parse '" + item + "' as a number");
    }
    if (!(v >= 0.0 && v < 1.0)) throw UsageError("--q: level " + item + " is outside [0, 1)");
    out.push_back(v);
    pos = end + 1;
  }
  return out;
}

json load_json(const std::string& path) {
  if (path.empty()) throw UsageError("--portfolio is required");
  std::ifstream in(path);
  if (!in) throw ConfigError("--portfolio", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
}

const json& member(const json& doc, const char* name) {
  if (!doc.is_object() || !doc.contains(name)) {
    throw ConfigError(std::string("portfolio.") + name, std::string("missing field '") + name + "'");
  }
  return doc.at(name);
}

void require_samples(const Options& o) {
  if (o.n < kMinSamples) throw UsageError("--n must be at least " + std::to_string(kMinSamples));
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out.empty()) {
    out << text;
    return;
  }
  std::ofstream file(o.out);
  if (!file) throw UsageError("--out: cannot write '" + o.out + "'");
  file << text;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

int cmd_allocate(const Options& o, std::ostream& out) {
  require_samples(o);
  const auto levels = parse_levels(o.q_list.empty() ? "0,0.5,0.9,0.95,0.99" : o.q_list);
  const auto spec = dist::portfolio_from_json(load_json(o.portfolio), "portfolio");
  const auto m = dist::sample_portfolio(spec, o.n, o.seed);

  measures::AllocationOptions opts;
  opts.kappa = o.kappa;
  opts.min_tail_count = kMinTailRows;
  std::vector<measures::AllocationReport> reports;
  for (double q : levels) reports.push_back(measures::allocations(m, q, opts));

  if (o.format.empty() || o.format == "csv") {
    std::ostringstream text;
    measures::write_csv(text, reports);
    emit(o, out, text.str());
  } else {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(measures::to_json(r));
    emit(o, out, dump({{"portfolio", dist::to_json(spec)}, {"n", o.n}, {"seed", o.seed}, {"reports", arr}}));
  }
  return kOk;
}

membership::MembershipVerdict empirical_main(const dist::PortfolioSpec& spec, const Options& o,
                                             const std::vector<double>& grid) {
  require_samples(o);
  return membership::check_main(dist::sample_portfolio(spec, o.n, o.seed), grid, o.sigma);
}

int cmd_membership(const Options& o, std::ostream& out) {
  if (o.criterion.empty()) throw UsageError("--criterion is required");
  const auto criterion = [&] {
    try {
      return membership::parse_criterion(o.criterion);
    } catch (const DomainError& e) {
      throw UsageError(std::string("--criterion: ") + e.what());
    }
  }();
  const double tol = o.tol.value_or(membership::kDefaultTol);
  const auto grid = membership::default_t_grid();
  const json doc = load_json(o.portfolio);

  json result;
  bool pass = false;
  auto finish = [&](const membership::MembershipVerdict& v) {
    result = membership::to_json(v);
    pass = v.pass;
  };

  switch (criterion) {
    case membership::Criterion::main:
      finish(empirical_main(dist::portfolio_from_json(doc, "portfolio"), o, grid));
      break;
    case membership::Criterion::independent: {
      const auto spec = dist::portfolio_from_json(doc, "portfolio");
      std::vector<dist::MarginalSpec> ms;
      try {
        ms = dist::independent_marginals(spec);
      } catch (const UnsupportedFamilyError& e) {
        throw UsageError(std::string("--criterion independent: ") + e.what());
      }
      try {
        finish(membership::check_independent(ms, grid, tol));
      } catch (const UnsupportedFamilyError&) {
        auto v = empirical_main(spec, o, grid);
        v.reason = "no analytic transform; empirical comparison";
        finish(v);
      }
      break;
    }
    case membership::Criterion::merge: {
      membership::MergeOptions mo;
      mo.tol = tol;
      mo.sigma_mult = o.sigma;
      mo.mc.n_samples = o.n;
      mo.mc.seed = o.seed;
      const auto x = dist::portfolio_from_json(member(doc, "x"), "portfolio.x");
      const auto y = dist::portfolio_from_json(member(doc, "y"), "portfolio.y");
      if (!membership::has_analytic_laplace(x) || !membership::has_analytic_laplace(y)) require_samples(o);
      finish(membership::check_merge(x, y, grid, mo));
      break;
    }
    case membership::Criterion::amalgamate: {
      std::vector<std::vector<double>> means;
      if (doc.is_object() && doc.contains("means")) {
        const json& rows = doc.at("means");
        if (!rows.is_array()) throw ConfigError("portfolio.means", "expected an array of rows");
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const std::string path = "portfolio.means[" + std::to_string(r) + "]";
          if (!rows[r].is_array()) throw ConfigError(path, "expected an array of numbers");
          std::vector<double> row;
          for (const auto& v : rows[r]) {
            if (!v.is_number()) throw ConfigError(path, "expected an array of numbers");
            row.push_back(v.get<double>());
          }
          means.push_back(std::move(row));
        }
      } else {
        means.push_back(dist::analytic_unit_means(dist::portfolio_from_json(member(doc, "x"), "portfolio.x")));
        means.push_back(dist::analytic_unit_means(dist::portfolio_from_json(member(doc, "y"), "portfolio.y")));
      }
      finish(membership::check_amalgamate(means, o.tol.value_or(1e-9)));
      break;
    }
    case membership::Criterion::mg_w1:
    case membership::Criterion::mg_w2: {
      const auto spec = dist::portfolio_from_json(doc, "portfolio");
      const auto* mg = std::get_if<dist::MixedGamma>(&spec);
      if (!mg) throw UsageError("--criterion " + o.criterion + " needs a mixed_gamma portfolio");
      finish(criterion == membership::Criterion::mg_w1 ? membership::check_mg_w1(mg->shapes, mg->scales, tol)
                                                       : membership::check_mg_w2(mg->shapes, mg->scales, tol));
      break;
    }
    case membership::Criterion::wk_necessary: {
      require_samples(o);
      if (o.k < 1) throw UsageError("--k must be a positive integer");
      const auto spec = dist::portfolio_from_json(doc, "portfolio");
      finish(membership::check_wk_necessary(dist::sample_portfolio(spec, o.n, o.seed), o.k, grid, o.sigma));
      break;
    }
    case membership::Criterion::lukacs: {
      const auto spec = dist::portfolio_from_json(doc, "portfolio");
      std::vector<dist::MarginalSpec> ms;
      try {
        ms = dist::independent_marginals(spec);
      } catch (const UnsupportedFamilyError& e) {
        throw UsageError(std::string("--criterion lukacs: ") + e.what());
      }
      membership::LukacsOptions lo;
      lo.tol = tol;
      lo.n_samples = o.n;
      lo.seed = o.seed;
      require_samples(o);
      const auto v = membership::lukacs_check(ms, lo);
      result = membership::to_json(v);
      pass = v.classification.pass;
      break;
    }
  }
  emit(o, out, dump(result));
  return pass ? kOk : kCheckFailed;
}

int cmd_verify(const Options& o, std::ostream& out) {
  if (o.suite.empty()) throw UsageError("--suite is required");
  const auto& names = verify::suite_names();
  if (std::find(names.begin(), names.end(), o.suite) == names.end()) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("--suite: unknown suite '" + o.suite + "' (known: " + known + ")");
  }
  require_samples(o);
  verify::SuiteConfig cfg;
  cfg.n = o.n;
  cfg.seed = o.seed;
  if (!o.portfolio.empty()) cfg.portfolio = dist::portfolio_from_json(load_json(o.portfolio), "portfolio");
  const auto rows = verify::run_suite(o.suite, cfg);

  std::ostringstream text;
  if (o.format == "json") {
    text << dump(verify::to_json(rows));
  } else if (o.format == "csv") {
    text << "suite,name,pass,value,bound\n";
    for (const auto& r : rows) {
      text << r.suite << ",\"" << r.name << "\"," << (r.pass ? 1 : 0) << ',' << measures::format_number(r.value)
           << ',' << measures::format_number(r.bound) << '\n';
    }
  } else {
    verify::write_table(text, rows);
  }
  emit(o, out, text.str());
  for (const auto& r : rows)
    if (!r.pass) return kCheckFailed;
  return kOk;
}

int cmd_gradient(const Options& o, std::ostream& out) {
  require_samples(o);
  const auto levels = parse_levels(o.q_list.empty() ? "0.5,0.9" : o.q_list);
  const double tol = o.tol.value_or(0.01);
  const auto spec = dist::portfolio_from_json(load_json(o.portfolio), "portfolio");
  const auto m = dist::sample_portfolio(spec, o.n, o.seed);
  if (o.unit > m.units()) throw UsageError("--unit is larger than the number of units");

  measures::AllocationOptions opts;
  opts.min_tail_count = kMinTailRows;
  json rows = json::array();
  std::ostringstream csv;
  csv << "q,unit,derivative,gte_r_tilde,rel_error\n";
  bool all_pass = true;
  for (double q : levels) {
    const auto rep = measures::allocations(m, q, opts);
    for (std::size_t i = 0; i < m.units(); ++i) {
      if (o.unit != 0 && i + 1 != o.unit) continue;
      const double fd = measures::gte_gradient_fd(m, q, i, o.h);
      const double target = rep.gte_s * rep.units[i].r_tilde;
      const double rel = std::abs(fd - target) / std::abs(target);
      all_pass = all_pass && rel <= tol;
      rows.push_back({{"q", q}, {"unit", i + 1}, {"derivative", fd}, {"gte_r_tilde", target}, {"rel_error", rel}});
      csv << measures::format_number(q) << ',' << i + 1 << ',' << measures::format_number(fd) << ','
          << measures::format_number(target) << ',' << measures::format_number(rel) << '\n';
    }
  }
  if (o.format == "json") {
    emit(o, out, dump({{"h", o.h}, {"tol", tol}, {"pass", all_pass}, {"rows", rows}}));
  } else {
    emit(o, out, csv.str());
  }
  return all_pass ? kOk : kCheckFailed;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--n", o.n, "Monte Carlo rows (at least 10000)");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output file (default: stdout)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Risk-capital allocation laboratory"};
  app.require_subcommand(1);

  auto* allocate = app.add_subcommand("allocate", "CTE and GTE proportional allocations");
  allocate->add_option("--portfolio", o.portfolio, "Portfolio JSON file")->required();
  allocate->add_option("--q", o.q_list, "Comma-separated levels in [0, 1)");
  allocate->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  allocate->add_option("--kappa", o.kappa, "Capital to split as kappa * r");
  add_common(allocate, o);

  auto* membership_cmd = app.add_subcommand("membership", "Membership criteria");
  membership_cmd->add_option("--portfolio", o.portfolio, "Portfolio or criterion JSON file")->required();
  membership_cmd->add_option("--criterion", o.criterion,
                             "main, independent, merge, amalgamate, mg_w1, mg_w2, wk_necessary, lukacs")
      ->required();
  membership_cmd->add_option("--tol", o.tol, "Tolerance for analytic checks");
  membership_cmd->add_option("--sigma", o.sigma, "Standard-error multiple for empirical checks");
  membership_cmd->add_option("--k", o.k, "Size-bias order for wk_necessary");
  membership_cmd->add_option("--format", o.format, "json")->check(CLI::IsMember({"json"}));
  add_common(membership_cmd, o);

  auto* verify_cmd = app.add_subcommand("verify", "Run a verification suite");
  verify_cmd->add_option("--suite", o.suite, "Suite name")->required();
  verify_cmd->add_option("--portfolio", o.portfolio, "Optional portfolio for tail-bounds/covariance-identity");
  verify_cmd->add_option("--format", o.format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  add_common(verify_cmd, o);

  auto* gradient = app.add_subcommand("gradient-check", "Finite-difference GTE gradient against GTE * r_tilde");
  gradient->add_option("--portfolio", o.portfolio, "Portfolio JSON file")->required();
  gradient->add_option("--q", o.q_list, "Comma-separated levels in [0, 1)");
  gradient->add_option("--unit", o.unit, "Unit to check, from 1 (default: all)");
  gradient->add_option("--step", o.h, "Finite-difference step (default 1e-3)");
  gradient->add_option("--tol", o.tol, "Relative tolerance (default 0.01)");
  gradient->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  add_common(gradient, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (allocate->parsed()) return cmd_allocate(o, out);
    if (membership_cmd->parsed()) return cmd_membership(o, out);
    if (verify_cmd->parsed()) return cmd_verify(o, out);
    return cmd_gradient(o, out);
  } catch (const DegenerateTailError& e) {
    err << "degenerate tail: " << e.what() << '\n';
    return kDegenerate;
  } catch (const DegenerateWeightsError& e) {
    err << "degenerate weights: " << e.what() << '\n';
    return kDegenerate;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace riskalloc::cli
