#pragma once

#include "riskalloc/errors.hpp"

namespace riskalloc::measures {

template <class V, class W>
double weighted_risk_measure(V&& v, W&& w, std::span<const double> s) {
  if (s.empty()) throw DomainError("weighted risk measure of an empty sample");
  double num = 0.0;
  double den = 0.0;
  for (double x : s) {
    const double wx = w(x);
    if (wx == 0.0) continue;
    num += v(x) * wx;
    den += wx;
  }
  if (!(den > 0.0)) throw DegenerateWeightsError("weighted risk measure has zero total weight");
  return num / den;
}

}  // namespace riskalloc::measures
