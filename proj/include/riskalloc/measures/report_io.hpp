#pragma once

#include <ostream>
#include <span>
#include <string>

#include <json.hpp>

#include "riskalloc/measures/allocation.hpp"

namespace riskalloc::measures {

/// Header line of the CSV layout, without the trailing newline.
extern const char* const kCsvHeader;

/// One row per (q, unit): q,unit,r,r_se,r_tilde,r_tilde_se,cond_cov,identity_residual
/// Units are numbered from 1. Numbers use the shortest round-trip form with
/// '.' as the decimal separator regardless of locale; NaN prints as "nan".
void write_csv(std::ostream& out, std::span<const AllocationReport> reports);

/// Formats a double the way write_csv does.
std::string format_number(double v);

/// NaN standard errors are stored as null.
nlohmann::json to_json(const AllocationReport& report);
AllocationReport report_from_json(const nlohmann::json& j);

}  // namespace riskalloc::measures
