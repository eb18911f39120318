#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "smdlab/geometry.hpp"

namespace smd {

enum class ProblemKind { Quadratic, PiecewiseLinearMax, L1Norm, LinearOnSimplex };

/// Parameters for every problem kind; only the fields of the chosen kind are read.
struct ProblemParams {
  Eigen::MatrixXd A;          // Quadratic: f = 1/2 x'Ax - b'x
  Vec b;                      // Quadratic
  std::vector<Vec> pieces;    // PiecewiseLinearMax: f = max_i <a_i, x> + c_i
  std::vector<double> offsets;
  Vec shift;                  // L1Norm: f = ||x - shift||_1
  Vec cost;                   // LinearOnSimplex: f = <c, x>
};

/// Convex benchmark objective on a compact set, with analytic f* and G.
class Problem {
 public:
  ProblemKind kind() const { return kind_; }
  int dim() const { return dim_; }
  double f_star() const { return f_star_; }
  /// Bound on the dual norm of every subgradient over the set.
  double G() const { return G_; }
  const ConstraintSet& set() const { return set_; }
  const ProblemParams& params() const { return params_; }
  /// One optimal point (on the plain set; see Geometry::clamp for entropic runs).
  const Vec& x_star() const { return x_star_; }

  double value(const Vec& x) const;
  /// Deterministic subgradient selector: zero at kinks of |.| and the smallest
  /// active index for piecewise-linear maxima.
  Vec subgrad(const Vec& x) const;
  /// value(x) - f*, for feasible x. Throws InputError otherwise.
  double gap(const Vec& x) const;

  std::string name() const;

 private:
  friend Problem make_problem(ProblemKind, int, ProblemParams, ConstraintSet, const NormPair&);

  ProblemKind kind_ = ProblemKind::Quadratic;
  int dim_ = 0;
  ProblemParams params_;
  ConstraintSet set_;
  double f_star_ = 0.0;
  double G_ = 0.0;
  Vec x_star_;
};

/// Builds a problem and computes f* and G in closed form. Throws ConfigError
/// when the kind has no closed-form optimum on the given set.
Problem make_problem(ProblemKind kind, int dim, ProblemParams params, ConstraintSet set,
                     const NormPair& norms);

}  // namespace smd
