#pragma once

#include <Eigen/Dense>

#include <string>

#include "smdlab/rng.hpp"

namespace smd {

using Vec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// Primal/dual norm pair. L2 is self-dual; the dual of L1 is Linf.
enum class PrimalNorm { L2, L1 };

struct NormPair {
  PrimalNorm primal = PrimalNorm::L2;

  double primal_norm(const Vec& v) const;
  double dual_norm(const Vec& v) const;
  std::string name() const;
};

/// Closed-form dual norm. Throws InputError on non-finite entries.
double dual_norm(const NormPair& pair, const Vec& v);

// ---------------------------------------------------------------------------
// Mirror maps
// ---------------------------------------------------------------------------

enum class MapKind { EuclideanHalfSq, NegativeEntropy };

/// Strongly convex generator R. For NegativeEntropy, R(x) = sum x_i ln x_i and
/// coordinates are kept at or above entropy_floor so grad R stays finite.
struct MirrorMap {
  MapKind kind = MapKind::EuclideanHalfSq;
  double sigma_R = 1.0;
  double entropy_floor = 1e-12;

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  /// True if x lies in the domain where grad R is finite.
  bool in_domain(const Vec& x) const;
  std::string name() const;
};

/// D_R(x, y) = R(x) - R(y) - <grad R(y), x - y>, clamped below at 0.
double bregman(const MirrorMap& map, const Vec& x, const Vec& y);

/// |D(z,y) - D(z,x) - D(x,y) - <grad R(x) - grad R(y), z - x>|.
double three_point_residual(const MirrorMap& map, const Vec& x, const Vec& y, const Vec& z);

// ---------------------------------------------------------------------------
// Constraint sets
// ---------------------------------------------------------------------------

enum class SetKind { Box, L2Ball, Simplex };

struct ConstraintSet {
  SetKind kind = SetKind::Box;
  Vec lo, hi;      // Box
  Vec center;      // L2Ball
  double radius = 0.0;
  int dim = 0;

  static ConstraintSet box(Vec lo, Vec hi);
  static ConstraintSet ball(Vec center, double radius);
  static ConstraintSet simplex(int dim);

  /// Membership up to an absolute tolerance (default 1e-12).
  bool contains(const Vec& x, double tol = 1e-12) const;
  /// Diameter in the given primal norm.
  double diameter(const NormPair& pair) const;
  /// Box center, ball center, or simplex barycenter.
  Vec analytic_center() const;
  /// argmin over the set of <w, u>. Ties resolve to the low side.
  Vec linear_minimizer(const Vec& w) const;
  std::string name() const;
};

// ---------------------------------------------------------------------------
// Geometry bundle
// ---------------------------------------------------------------------------

/// A supported (map, norm pair, set) triple. Construction validates the pairing.
class Geometry {
 public:
  Geometry(MirrorMap map, NormPair norms, ConstraintSet set);

  const MirrorMap& map() const { return map_; }
  const NormPair& norms() const { return norms_; }
  const ConstraintSet& set() const { return set_; }
  int dim() const { return set_.dim; }

  /// Diameter D of the set in the primal norm.
  double diameter() const { return set_.diameter(norms_); }
  /// sup over the (clamped, for entropy) set of D_R(x, y).
  double bregman_radius() const;

  /// Membership in the set the algorithm actually visits (the floor-clamped
  /// simplex for the entropic map).
  bool feasible(const Vec& x, double tol = 1e-12) const;
  /// Bregman projection of a set point onto the visited set. Identity for
  /// Euclidean geometries.
  Vec clamp(const Vec& x) const;
  /// Uniform-ish random point of the visited set.
  Vec random_point(Stream& rng) const;
  /// Exact minimizer of <w, u> over the visited set.
  Vec linear_minimizer(const Vec& w) const;

 private:
  MirrorMap map_;
  NormPair norms_;
  ConstraintSet set_;
};

/// Unique minimizer over the set of <g, u - x> + (1/alpha) D_R(u, x).
///
/// Closed forms only: Euclidean+Box clips the gradient step, Euclidean+L2Ball
/// radially projects it, and NegativeEntropy+Simplex applies the
/// exponentiated-gradient update followed by the exact KL projection onto
/// {u >= entropy_floor, sum u = 1}. Throws ConfigError for any other pairing
/// and InputError for alpha <= 0 or non-finite g.
Vec mirror_step(const MirrorMap& map, const ConstraintSet& set, const Vec& x, const Vec& g,
                double alpha);

inline Vec mirror_step(const Geometry& geom, const Vec& x, const Vec& g, double alpha) {
  return mirror_step(geom.map(), geom.set(), x, g, alpha);
}

/// KL projection of a positive vector y onto {u >= floor, sum u = 1}:
/// u_i = max(floor, s * y_i) with s fixed by the sum constraint.
/// y is given in log space (log_y) so tiny weights do not underflow.
Vec clamped_simplex_projection(const Vec& log_y, double floor);

}  // namespace smd
