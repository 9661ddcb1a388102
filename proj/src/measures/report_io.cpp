#include "riskalloc/measures/report_io.hpp"

#include <charconv>
#include <cmath>

#include "riskalloc/errors.hpp"

namespace riskalloc::measures {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_number(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ConfigError(name, "missing field");
  if (it->is_null()) return NAN;
  if (!it->is_number()) throw ConfigError(name, "expected a number");
  return it->get<double>();
}

}  // namespace

const char* const kCsvHeader = "q,unit,r,r_se,r_tilde,r_tilde_se,cond_cov,identity_residual";

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, std::span<const AllocationReport> reports) {
  out << kCsvHeader << '\n';
  for (const auto& report : reports) {
    for (std::size_t i = 0; i < report.units.size(); ++i) {
      const auto& u = report.units[i];
      out << format_number(report.q) << ',' << (i + 1) << ',' << format_number(u.r) << ','
          << format_number(u.r_se) << ',' << format_number(u.r_tilde) << ',' << format_number(u.r_tilde_se)
          << ',' << format_number(u.cond_cov) << ',' << format_number(u.identity_residual) << '\n';
    }
  }
}

json to_json(const AllocationReport& report) {
  json units = json::array();
  for (std::size_t i = 0; i < report.units.size(); ++i) {
    const auto& u = report.units[i];
    json row{{"unit", i + 1},
             {"r", u.r},
             {"r_se", number_or_null(u.r_se)},
             {"r_tilde", u.r_tilde},
             {"r_tilde_se", number_or_null(u.r_tilde_se)},
             {"cond_cov", u.cond_cov},
             {"cond_cov_se", number_or_null(u.cond_cov_se)},
             {"gap_se", number_or_null(u.gap_se)},
             {"identity_residual", u.identity_residual}};
    if (u.kappa_share) row["kappa_share"] = *u.kappa_share;
    units.push_back(std::move(row));
  }
  json j{{"q", report.q},
         {"var", report.var_s},
         {"cte", report.cte_s},
         {"gte", report.gte_s},
         {"tail_count", report.tail_count},
         {"degenerate_fallback", report.degenerate_fallback},
         {"units", std::move(units)}};
  if (report.kappa) j["kappa"] = *report.kappa;
  return j;
}

AllocationReport report_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("report", "expected an object");
  AllocationReport report;
  report.q = read_number(j, "q");
  report.var_s = read_number(j, "var");
  report.cte_s = read_number(j, "cte");
  report.gte_s = read_number(j, "gte");
  report.tail_count = j.at("tail_count").get<std::size_t>();
  report.degenerate_fallback = j.value("degenerate_fallback", false);
  if (j.contains("kappa")) report.kappa = read_number(j, "kappa");
  for (const auto& row : j.at("units")) {
    UnitAllocation u;
    u.r = read_number(row, "r");
    u.r_se = read_number(row, "r_se");
    u.r_tilde = read_number(row, "r_tilde");
    u.r_tilde_se = read_number(row, "r_tilde_se");
    u.cond_cov = read_number(row, "cond_cov");
    u.cond_cov_se = read_number(row, "cond_cov_se");
    u.gap_se = read_number(row, "gap_se");
    u.identity_residual = read_number(row, "identity_residual");
    if (row.contains("kappa_share")) u.kappa_share = read_number(row, "kappa_share");
    report.units.push_back(u);
  }
  return report;
}

}  // namespace riskalloc::measures
