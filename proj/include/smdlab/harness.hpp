#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "smdlab/bounds.hpp"
#include "smdlab/smd.hpp"

namespace smd {

struct TrialRecord {
  std::uint64_t trial = 0;
  std::vector<double> gap_z;  // one entry per checkpoint

  bool operator==(const TrialRecord&) const = default;
};

/// gap_z at each checkpoint for a set of independent trials. Records are kept
/// sorted by trial index, so merging is order-independent.
struct TrialSet {
  std::string digest;
  std::uint64_t base_seed = 0;
  std::uint64_t T = 0;
  std::vector<std::uint64_t> checkpoints;
  std::vector<TrialRecord> trials;

  std::size_t n_trials() const { return trials.size(); }
  /// Column of gaps at checkpoint t. Throws InputError for an unrecorded t.
  std::vector<double> gaps_at(std::uint64_t t) const;
  /// Absorbs trials with disjoint indices. Throws InputError on mismatched
  /// configuration, seed, checkpoints, or overlapping trial indices.
  void merge(const TrialSet& other);

  bool operator==(const TrialSet&) const = default;
};

/// Worker count from SMDLAB_WORKERS, defaulting to hardware concurrency.
int default_workers();

/// Geometric grid {1, 2, 4, ...} up to T, plus T and any extra points in [1, T].
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t T,
                                                 std::span<const std::uint64_t> extra = {});

/// Trials first_trial .. first_trial + n - 1, each a pure function of
/// (experiment, base_seed, trial index). A NumericalError is rethrown tagged
/// with the smallest failing trial index.
TrialSet run_trials(const Experiment& ex, std::uint64_t n, std::uint64_t T,
                    std::vector<std::uint64_t> checkpoints, std::uint64_t base_seed,
                    std::uint64_t first_trial = 0, int workers = 0);

struct TailEstimate {
  std::uint64_t t = 0;
  double eps = 0.0;
  std::uint64_t successes = 0;  // trials with gap_z(t) >= eps
  std::uint64_t n = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  double gamma = 0.99;
};

/// Exact binomial estimate of P(gap_z(t) >= eps), two-sided at level gamma.
TailEstimate tail_probability(const TrialSet& ts, std::uint64_t t, double eps, double gamma = 0.99);

struct RateFit {
  double slope = 0.0;
  double stderr = 0.0;
  std::size_t points = 0;
  bool flagged = false;  // some median gap was <= 0
};

/// Least-squares slope of log(gap) against log(t).
RateFit fit_loglog(std::span<const double> t, std::span<const double> gap);

/// Slope of log(median gap_z) vs log t over checkpoints in [t_lo, t_hi].
RateFit fit_rate(const TrialSet& ts, std::uint64_t t_lo, std::uint64_t t_hi);

enum class Verdict { Consistent, Violation };

struct Comparison {
  Verdict verdict = Verdict::Consistent;
  double margin = 0.0;  // bound - p_hat
};

/// Consistent iff the estimate's lower confidence limit does not exceed the bound.
Comparison compare_bound(const TailEstimate& est, double bound);

/// Overrides for deriving bound constants from an experiment.
struct BoundOverrides {
  std::optional<double> kappa1;
  std::optional<double> nu2;
  std::optional<double> a_ceiling;
  std::uint64_t T_max = 1000000;
};

/// kappa1 = 3 under L2; 3n under l1/linf (norm equivalence between linf and l2).
double default_kappa1(const Geometry& geom);

/// Bound constants from the experiment's geometry, problem and declared oracle.
/// nu2 falls back to `estimated_nu2` when not overridden.
BoundParams bound_params_for(const Experiment& ex, const BoundOverrides& ov,
                             std::optional<double> estimated_nu2 = std::nullopt);

}  // namespace smd
