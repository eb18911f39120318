#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "smdlab/smd.hpp"

namespace smd {

/// B(t) = B0 * t^-q.
struct BiasSchedule {
  double B0 = 0.0;
  double q = 1.0;

  double at(std::uint64_t t) const;
};

/// Largest supported T_max; step indices stay exact as doubles.
inline constexpr std::uint64_t kMaxHorizon = std::uint64_t(1) << 53;

/// Constants feeding the concentration bounds.
struct BoundParams {
  double sigma_R = 1.0;
  double nu = 0.0;
  double G = 0.0;
  double D = 0.0;
  double R_sup = 0.0;  // sup over the set of D_R(x, y)
  double kappa1 = 3.0;
  std::optional<double> nu1;
  std::optional<double> nu2;
  std::optional<double> a_ceiling;
  StepSchedule sched;
  BiasSchedule bias;
  std::uint64_t T_max = 1000000;

  /// Throws InputError for negative/non-finite constants or a violated
  /// sub-Gaussian step precondition alpha(t)^2 kappa1 / (2 sigma_R) <= 1/a.
  void validate() const;
  /// The a that makes the precondition tight at t = 1.
  double default_a_ceiling() const;
};

/// Power-law series tracked by the sum cache.
enum class Series { Alpha, Alpha2, AlphaB, Alpha2B2, Alpha4 };

struct Bracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// Prefix sums of alpha, alpha^2, alpha B, alpha^2 B^2, alpha^4 up to T_max,
/// plus integral brackets for the tails beyond T_max. Sums are tabulated up to
/// kStoredPrefix steps and continued in closed form past that.
class SumCache {
 public:
  SumCache(const StepSchedule& sched, const BiasSchedule& bias, std::uint64_t T_max);

  std::uint64_t T_max() const { return T_max_; }
  /// sum_{k=1}^t, for 0 <= t <= T_max.
  double prefix(Series s, std::uint64_t t) const;
  /// Bracket on the infinite sum, or nullopt when it diverges.
  std::optional<Bracket> total(Series s) const;
  /// True when the series' infinite sum is finite.
  bool converges(Series s) const;

  static constexpr std::uint64_t kStoredPrefix = std::uint64_t(1) << 20;
  /// sum_{k=a}^b c k^-e.
  static double power_sum(double c, double e, std::uint64_t a, std::uint64_t b);

 private:
  double coef(Series s) const;
  double exponent(Series s) const;

  StepSchedule sched_;
  BiasSchedule bias_;
  std::uint64_t T_max_;
  std::uint64_t stored_ = 0;
  std::array<std::vector<double>, 5> prefix_;
};

struct KResult {
  double K = 1.0;    // conservative: exp(-S_upper)
  double err = 0.0;  // exp(-S_lower) - exp(-S_upper)
  bool divergent = false;
  double S_lower = 0.0;
  double S_upper = 0.0;
};

struct BoundValue {
  double raw = 0.0;
  double clipped = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double log_raw = 0.0;
  bool applicable = true;  // t >= t0
};

struct Thresholds {
  std::uint64_t t0 = 0, t1 = 0, t2 = 0, t_star = 0;
  std::array<bool, 3> resolved{true, true, true};
  bool all_resolved() const { return resolved[0] && resolved[1] && resolved[2]; }
};

/// Which of the three threshold inequalities to evaluate.
enum class Corollary { Variance, SubGaussian };

/// Closed-form evaluation of the concentration bounds and iteration
/// thresholds for one parameter set. Immutable after construction.
class BoundEvaluator {
 public:
  explicit BoundEvaluator(BoundParams params);

  const BoundParams& params() const { return params_; }
  const SumCache& sums() const { return sums_; }
  const KResult& K() const { return K_; }

  /// A(t) = sum_{k<=t} alpha(k).
  double A(std::uint64_t t) const { return sums_.prefix(Series::Alpha, t); }
  /// (eps / 3) K A(t).
  double tau(std::uint64_t t, double eps) const;

  BoundValue theorem4(std::uint64_t t, double eps) const;
  /// Throws ConfigError without nu1 and nu2.
  BoundValue theorem5(std::uint64_t t, double eps) const;

  Thresholds corollary2(double eps, double p) const;
  Thresholds corollary3(double eps, double p) const;

  /// Margin of threshold inequality i (0, 1, 2) at t: LHS - RHS; >= 0 means it holds.
  double deficit(Corollary which, int i, std::uint64_t t, double eps, double p) const;
  /// Applicability threshold for the bounds: t0 of the variance thresholds.
  std::uint64_t t0(double eps) const;

 private:
  Thresholds thresholds(Corollary which, double eps, double p) const;
  /// exp(S_upper) for thresholds; +inf for a divergent bias sum.
  double exp_S() const;

  BoundParams params_;
  SumCache sums_;
  KResult K_;
};

/// K = exp(-sum 2 alpha(k) B(k) / sigma_R), bracketed by the tail bounds.
KResult compute_K(const BoundParams& params, const SumCache& sums);

/// Summability of sum alpha(t) B(t): partial sum to T_max and tail bracket.
struct SummabilityReport {
  double partial = 0.0;
  std::optional<Bracket> total;
  double exponent = 0.0;  // k + q
  bool boundary = false;  // k + q == 1
};

SummabilityReport summability(const StepSchedule& sched, const BiasSchedule& bias,
                              std::uint64_t T_max);

}  // namespace smd
