#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smdlab/geometry.hpp"
#include "smdlab/oracle.hpp"
#include "smdlab/problems.hpp"

namespace smd {

/// alpha(t) = alpha0 * t^-k.
struct StepSchedule {
  double alpha0 = 1.0;
  double k = 0.75;

  /// Throws ConfigError for alpha0 <= 0 or k < 0.
  void validate() const;
  /// Non-empty when k is outside (1/2, 1] (sum alpha = inf, sum alpha^2 < inf).
  std::vector<std::string> warnings() const;
  double alpha(std::uint64_t t) const;
};

struct AuditRecord {
  /// max over references of D(ref, x+) - [D(ref, x) + alpha <g~, ref - x> + alpha^2/(2 sigma) ||g~||_*^2].
  double ber_residual = 0.0;
  /// 1 + |terms| of the residual that attained the max; used for the relative check.
  double ber_scale = 1.0;
  /// min over probes u of alpha <g~, u - x+> + <grad R(x+) - grad R(x), u - x+>.
  double opt_residual = 0.0;
};

struct TraceRow {
  std::uint64_t t = 0;
  Vec x;
  Vec z;
  double gap_x = 0.0;
  double gap_z = 0.0;
  Vec gtilde;
  std::optional<AuditRecord> audit;
};

struct Trace {
  std::string digest;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t T = 0;
  std::vector<TraceRow> rows;  // every step for T <= 10^4, thinned above
  Vec x_final;                 // x(T + 1)
};

/// Everything a run needs besides the horizon and seed.
struct Experiment {
  Problem problem;
  Geometry geometry;
  OracleConfig oracle;
  StepSchedule schedule;
  std::optional<Vec> x1;  // default: the set's analytic center, clamped into the domain
  std::string digest;

  Vec start_point() const;
  /// Optimal point inside the visited set (clamped for the entropic map).
  Vec reference_optimum() const;
};

struct RunOptions {
  std::uint64_t T = 1;
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  bool audit = false;
  int audit_random_refs = 5;
};

/// One SMD iteration as seen by an observer. x/z are x(t)/z(t); x_next is x(t+1).
struct StepView {
  std::uint64_t t;
  const Vec& x;
  const Vec& z;
  const Vec& x_next;
  const Vec& gtilde;
  double alpha;
  double gap_x;
  double gap_z;
  const AuditRecord* audit;
};

using StepObserver = std::function<void(const StepView&)>;

/// Core loop shared by run() and the Monte Carlo harness. Step t draws g~(t)
/// from the substream (seed, trial, t). Throws NumericalError on a non-finite
/// iterate and InputError on an infeasible start.
Vec iterate(const Experiment& ex, const RunOptions& opt, const StepObserver& observe);

/// Full trace of one run.
Trace run(const Experiment& ex, const RunOptions& opt);

/// z(t) = beta x(t) + (1 - beta) z(t-1) with beta = alpha_t / A_t.
Vec ergodic_update(const Vec& z_prev, const Vec& x_t, double alpha_t, double A_t);

/// Per-step audit of the Young-Fenchel descent inequality and first-order
/// optimality of x_next, against the reference point x_ref.
AuditRecord audit_step(const MirrorMap& map, const Vec& x_t, const Vec& x_next, const Vec& x_ref,
                       const Vec& gtilde, double alpha, double sigma_R, const NormPair& norms);

/// Audit against several references; opt_residual additionally uses the
/// exact linear minimizer over the geometry's set.
AuditRecord audit_step(const Geometry& geom, const Vec& x_t, const Vec& x_next,
                       const std::vector<Vec>& refs, const Vec& gtilde, double alpha);

/// Steps stored in a trace of horizon T.
bool keep_row(std::uint64_t t, std::uint64_t T);

}  // namespace smd
