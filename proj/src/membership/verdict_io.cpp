#include <array>

#include "riskalloc/errors.hpp"
#include "riskalloc/membership/verdict.hpp"

namespace riskalloc::membership {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<Criterion, const char*>, 8> kNames{{
    {Criterion::main, "main"},
    {Criterion::independent, "independent"},
    {Criterion::merge, "merge"},
    {Criterion::amalgamate, "amalgamate"},
    {Criterion::mg_w1, "mg_w1"},
    {Criterion::mg_w2, "mg_w2"},
    {Criterion::wk_necessary, "wk_necessary"},
    {Criterion::lukacs, "lukacs"},
}};

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string criterion_name(Criterion c) {
  for (const auto& [k, name] : kNames)
    if (k == c) return name;
  return "unknown";
}

Criterion parse_criterion(const std::string& name) {
  for (const auto& [k, n] : kNames)
    if (name == n) return k;
  std::string known;
  for (const auto& [k, n] : kNames) known += (known.empty() ? "" : ", ") + std::string(n);
  throw DomainError("unknown criterion '" + name + "' (known: " + known + ")");
}

json to_json(const MembershipVerdict& v) {
  json pairs = json::array();
  for (const auto& [i, j] : v.units_compared) pairs.push_back({i + 1, j + 1});
  json evidence = json::array();
  for (std::size_t g = 0; g < v.evidence_t.size(); ++g)
    evidence.push_back({{"t", v.evidence_t[g]}, {"gap", number_or_null(v.evidence_gap[g])}});
  json out{{"criterion", criterion_name(v.criterion)},
           {"pass", v.pass},
           {"worst_t", number_or_null(v.worst_t)},
           {"worst_gap", number_or_null(v.worst_gap)},
           {"threshold", v.threshold},
           {"worst_raw_gap", number_or_null(v.worst_raw_gap)},
           {"standardized", v.standardized},
           {"necessary_only", v.necessary_only},
           {"units_compared", std::move(pairs)},
           {"evidence", std::move(evidence)}};
  if (v.worst_pair) out["worst_pair"] = {v.worst_pair->first + 1, v.worst_pair->second + 1};
  if (!v.reason.empty()) out["reason"] = v.reason;
  return out;
}

json to_json(const IndependenceDiagnostic& d) {
  return json{{"n", d.n},
              {"bins", d.bins},
              {"statistic", d.statistic},
              {"dof", d.dof},
              {"p_value", d.p_value},
              {"alpha", d.alpha},
              {"consistent", d.consistent}};
}

json to_json(const LukacsVerdict& v) {
  json out = to_json(v.classification);
  if (v.first_order) out["first_order"] = to_json(*v.first_order);
  if (v.second_order) out["second_order"] = to_json(*v.second_order);
  if (v.diagnostic) out["independence"] = to_json(*v.diagnostic);
  return out;
}

}  // namespace riskalloc::membership
