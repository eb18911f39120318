#include "smdlab/stats.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <vector>

#include "smdlab/errors.hpp"

namespace smd {

namespace {

void check_args(std::uint64_t successes, std::uint64_t n, double gamma) {
  if (n == 0) throw InputError("binomial interval: n must be positive");
  if (successes > n) throw InputError("binomial interval: successes exceed n");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("binomial interval: gamma must be in (0,1)");
}

// Lower bound with tail mass `tail`: the tail-quantile of Beta(x, n - x + 1).
double lower_with_tail(std::uint64_t x, std::uint64_t n, double tail) {
  if (x == 0) return 0.0;
  return boost::math::ibeta_inv(double(x), double(n - x + 1), tail);
}

// Upper bound with tail mass `tail`: the (1 - tail)-quantile of Beta(x + 1, n - x).
double upper_with_tail(std::uint64_t x, std::uint64_t n, double tail) {
  if (x == n) return 1.0;
  return boost::math::ibeta_inv(double(x + 1), double(n - x), 1.0 - tail);
}

}  // namespace

BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t n, double gamma) {
  check_args(successes, n, gamma);
  const double tail = 0.5 * (1.0 - gamma);
  return {lower_with_tail(successes, n, tail), upper_with_tail(successes, n, tail)};
}

double clopper_pearson_lower(std::uint64_t successes, std::uint64_t n, double gamma) {
  check_args(successes, n, gamma);
  return lower_with_tail(successes, n, 1.0 - gamma);
}

double clopper_pearson_upper(std::uint64_t successes, std::uint64_t n, double gamma) {
  check_args(successes, n, gamma);
  return upper_with_tail(successes, n, 1.0 - gamma);
}

double median(std::span<const double> values) {
  if (values.empty()) throw InputError("median: empty input");
  std::vector<double> v(values.begin(), values.end());
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace smd
