#pragma once

#include <cstdint>
#include <span>

namespace smd {

/// Exact (Clopper-Pearson) binomial interval.
struct BinomialInterval {
  double low = 0.0;
  double high = 1.0;
};

/// Two-sided interval at confidence gamma: each tail carries (1 - gamma) / 2.
BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t n, double gamma);

/// One-sided bounds at confidence gamma (the whole 1 - gamma in one tail).
double clopper_pearson_lower(std::uint64_t successes, std::uint64_t n, double gamma);
double clopper_pearson_upper(std::uint64_t successes, std::uint64_t n, double gamma);

/// Median of a copy of the values (mean of the middle pair for even sizes).
double median(std::span<const double> values);

}  // namespace smd
