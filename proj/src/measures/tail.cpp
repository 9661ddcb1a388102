#include "riskalloc/measures/tail.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskalloc/errors.hpp"

namespace riskalloc::measures {
namespace {

void require_level(double q) {
  if (!(q >= 0.0 && q < 1.0)) {
    std::ostringstream msg;
    msg << "confidence level must lie in [0, 1), got " << q;
    throw DomainError(msg.str());
  }
}

[[noreturn]] void degenerate(double threshold) {
  std::ostringstream msg;
  msg << "tail {S > " << threshold << "} is empty";
  throw DegenerateTailError(msg.str(), threshold);
}

}  // namespace

double var_q(std::span<const double> s, double q) {
  require_level(q);
  if (s.empty()) throw DomainError("value-at-risk of an empty sample");
  const std::size_t n = s.size();
  const double nq = std::ceil(static_cast<double>(n) * q);
  const std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(nq));
  std::vector<double> work(s.begin(), s.end());
  auto nth = work.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(work.begin(), nth, work.end());
  return *nth;
}

TailSelection select_tail(std::span<const double> s, double q) {
  TailSelection out;
  out.q = q;
  out.threshold = var_q(s, q);
  for (std::size_t j = 0; j < s.size(); ++j)
    if (s[j] > out.threshold) out.indices.push_back(j);
  return out;
}

double cte(std::span<const double> s, double q, TailPolicy policy) {
  const TailSelection tail = select_tail(s, q);
  if (tail.indices.empty()) {
    if (policy == TailPolicy::ConventionFallback) return tail.threshold;
    degenerate(tail.threshold);
  }
  double sum = 0.0;
  for (std::size_t j : tail.indices) sum += s[j];
  return sum / static_cast<double>(tail.tail_count());
}

double gte(std::span<const double> s, double q, TailPolicy policy) {
  const TailSelection tail = select_tail(s, q);
  if (tail.indices.empty()) {
    if (policy == TailPolicy::ConventionFallback) return tail.threshold;
    degenerate(tail.threshold);
  }
  double sum = 0.0;
  for (std::size_t j : tail.indices) {
    if (!(s[j] > 0.0)) throw DomainError("geometric tail expectation needs positive tail values");
    sum += std::log(s[j]);
  }
  return std::exp(sum / static_cast<double>(tail.tail_count()));
}

double geometric_mean(std::span<const double> values) {
  if (values.empty()) throw DomainError("geometric mean of an empty sample");
  double sum = 0.0;
  for (double v : values) {
    if (!(v > 0.0)) throw DomainError("geometric mean needs positive values");
    sum += std::log(v);
  }
  return std::exp(sum / static_cast<double>(values.size()));
}

}  // namespace riskalloc::measures
