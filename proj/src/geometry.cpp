#include "smdlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "smdlab/errors.hpp"

namespace smd {

namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw InputError(std::string(what) + ": non-finite entries");
}

void require_same_dim(const Vec& a, const Vec& b, const char* what) {
  if (a.size() != b.size()) throw InputError(std::string(what) + ": dimension mismatch");
}

}  // namespace

// ---------------------------------------------------------------------------
// NormPair

double NormPair::primal_norm(const Vec& v) const {
  return primal == PrimalNorm::L2 ? v.norm() : v.lpNorm<1>();
}

double NormPair::dual_norm(const Vec& v) const {
  return primal == PrimalNorm::L2 ? v.norm() : v.lpNorm<Eigen::Infinity>();
}

std::string NormPair::name() const { return primal == PrimalNorm::L2 ? "l2" : "l1"; }

double dual_norm(const NormPair& pair, const Vec& v) {
  require_finite(v, "dual_norm");
  return pair.dual_norm(v);
}

// ---------------------------------------------------------------------------
// MirrorMap

bool MirrorMap::in_domain(const Vec& x) const {
  if (!x.allFinite()) return false;
  if (kind == MapKind::EuclideanHalfSq) return true;
  // Relative slack so points produced by the clamped projection always pass.
  return (x.array() >= entropy_floor * (1.0 - 1e-9)).all();
}

double MirrorMap::value(const Vec& x) const {
  if (!in_domain(x)) throw InputError("mirror map: point outside domain");
  if (kind == MapKind::EuclideanHalfSq) return 0.5 * x.squaredNorm();
  return (x.array() * x.array().log()).sum();
}

Vec MirrorMap::gradient(const Vec& x) const {
  if (!in_domain(x)) throw InputError("mirror map: point outside domain");
  if (kind == MapKind::EuclideanHalfSq) return x;
  return (x.array().log() + 1.0).matrix();
}

std::string MirrorMap::name() const {
  return kind == MapKind::EuclideanHalfSq ? "euclidean" : "entropy";
}

double bregman(const MirrorMap& map, const Vec& x, const Vec& y) {
  require_same_dim(x, y, "bregman");
  if (!map.in_domain(x) || !map.in_domain(y)) throw InputError("bregman: point outside domain");
  double d = 0.0;
  if (map.kind == MapKind::EuclideanHalfSq) {
    d = 0.5 * (x - y).squaredNorm();
  } else {
    // Generalized KL; equals R(x) - R(y) - <grad R(y), x - y> for R = sum x ln x.
    for (Eigen::Index i = 0; i < x.size(); ++i) d += x[i] * std::log(x[i] / y[i]) - x[i] + y[i];
  }
  return std::max(d, 0.0);
}

double three_point_residual(const MirrorMap& map, const Vec& x, const Vec& y, const Vec& z) {
  const double lhs = bregman(map, z, y) - bregman(map, z, x) - bregman(map, x, y);
  const double rhs = (map.gradient(x) - map.gradient(y)).dot(z - x);
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// ConstraintSet

ConstraintSet ConstraintSet::box(Vec lo, Vec hi) {
  if (lo.size() == 0 || lo.size() != hi.size()) throw ConfigError("box: lo/hi dimension mismatch");
  if (!lo.allFinite() || !hi.allFinite()) throw ConfigError("box: bounds must be finite");
  if ((hi.array() < lo.array()).any()) throw ConfigError("box: hi < lo");
  ConstraintSet s;
  s.kind = SetKind::Box;
  s.dim = static_cast<int>(lo.size());
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

ConstraintSet ConstraintSet::ball(Vec center, double radius) {
  if (center.size() == 0) throw ConfigError("ball: empty center");
  if (!center.allFinite() || !(radius > 0.0) || !std::isfinite(radius))
    throw ConfigError("ball: radius must be positive and finite");
  ConstraintSet s;
  s.kind = SetKind::L2Ball;
  s.dim = static_cast<int>(center.size());
  s.center = std::move(center);
  s.radius = radius;
  return s;
}

ConstraintSet ConstraintSet::simplex(int dim) {
  if (dim < 1) throw ConfigError("simplex: dimension must be positive");
  ConstraintSet s;
  s.kind = SetKind::Simplex;
  s.dim = dim;
  return s;
}

bool ConstraintSet::contains(const Vec& x, double tol) const {
  if (x.size() != dim || !x.allFinite()) return false;
  switch (kind) {
    case SetKind::Box:
      return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
    case SetKind::L2Ball:
      return (x - center).norm() <= radius + tol;
    case SetKind::Simplex:
      return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
  }
  return false;
}

double ConstraintSet::diameter(const NormPair& pair) const {
  switch (kind) {
    case SetKind::Box:
      return pair.primal_norm(hi - lo);
    case SetKind::L2Ball:
      return pair.primal == PrimalNorm::L2 ? 2.0 * radius : 2.0 * radius * std::sqrt(double(dim));
    case SetKind::Simplex:
      if (dim == 1) return 0.0;
      return pair.primal == PrimalNorm::L1 ? 2.0 : std::sqrt(2.0);
  }
  return 0.0;
}

Vec ConstraintSet::analytic_center() const {
  switch (kind) {
    case SetKind::Box:
      return 0.5 * (lo + hi);
    case SetKind::L2Ball:
      return center;
    case SetKind::Simplex:
      return Vec::Constant(dim, 1.0 / dim);
  }
  return {};
}

Vec ConstraintSet::linear_minimizer(const Vec& w) const {
  switch (kind) {
    case SetKind::Box: {
      Vec u(dim);
      for (int i = 0; i < dim; ++i) u[i] = w[i] > 0.0 ? lo[i] : (w[i] < 0.0 ? hi[i] : lo[i]);
      return u;
    }
    case SetKind::L2Ball: {
      const double n = w.norm();
      if (n == 0.0) return center;
      return center - radius * w / n;
    }
    case SetKind::Simplex: {
      Eigen::Index best = 0;
      w.minCoeff(&best);
      Vec u = Vec::Zero(dim);
      u[best] = 1.0;
      return u;
    }
  }
  return {};
}

std::string ConstraintSet::name() const {
  switch (kind) {
    case SetKind::Box:
      return "box";
    case SetKind::L2Ball:
      return "ball";
    case SetKind::Simplex:
      return "simplex";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Clamped simplex projection

Vec clamped_simplex_projection(const Vec& log_y, double floor) {
  const auto n = log_y.size();
  if (n == 0) throw InputError("clamped projection: empty vector");
  if (!(floor > 0.0) || floor * double(n) >= 1.0)
    throw InputError("clamped projection: entropy floor too large for dimension");
  if (log_y.array().isNaN().any() || (log_y.array() == std::numeric_limits<double>::infinity()).any())
    throw InputError("clamped projection: invalid log weights");

  const double top = log_y.maxCoeff();
  Vec y = (log_y.array() - top).exp().matrix();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return y[a] < y[b]; });

  // Clamp the smallest weights one at a time until the scaled remainder clears
  // the floor. The scale only decreases as coordinates are clamped.
  double free_sum = y.sum();
  std::size_t clamped = 0;
  double scale = 1.0 / free_sum;
  while (clamped < order.size()) {
    scale = (1.0 - double(clamped) * floor) / free_sum;
    const auto i = order[clamped];
    if (scale * y[i] >= floor) break;
    free_sum -= y[i];
    ++clamped;
  }

  Vec u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = std::max(floor, scale * y[i]);
  return u;
}

// ---------------------------------------------------------------------------
// Mirror step

Vec mirror_step(const MirrorMap& map, const ConstraintSet& set, const Vec& x, const Vec& g,
                double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("mirror_step: alpha must be positive");
  require_finite(g, "mirror_step gradient");
  require_same_dim(x, g, "mirror_step");
  if (x.size() != set.dim) throw InputError("mirror_step: point dimension does not match set");

  if (map.kind == MapKind::EuclideanHalfSq) {
    const Vec step = x - alpha * g;
    switch (set.kind) {
      case SetKind::Box:
        return step.cwiseMax(set.lo).cwiseMin(set.hi);
      case SetKind::L2Ball: {
        const Vec d = step - set.center;
        const double n = d.norm();
        if (n <= set.radius) return step;
        return set.center + d * (set.radius / n);
      }
      case SetKind::Simplex:
        break;
    }
    throw ConfigError("mirror_step: euclidean map supports box and ball sets only");
  }

  if (set.kind != SetKind::Simplex)
    throw ConfigError("mirror_step: entropic map supports the simplex only");
  if (!map.in_domain(x)) throw InputError("mirror_step: point outside entropic domain");
  const Vec log_y = (x.array().log() - alpha * g.array()).matrix();
  return clamped_simplex_projection(log_y, map.entropy_floor);
}

// ---------------------------------------------------------------------------
// Geometry

Geometry::Geometry(MirrorMap map, NormPair norms, ConstraintSet set)
    : map_(map), norms_(norms), set_(std::move(set)) {
  if (map_.kind == MapKind::EuclideanHalfSq) {
    if (norms_.primal != PrimalNorm::L2)
      throw ConfigError("geometry: euclidean map requires the l2 norm pair");
    if (set_.kind == SetKind::Simplex)
      throw ConfigError("geometry: euclidean map supports box and ball sets only");
  } else {
    if (norms_.primal != PrimalNorm::L1)
      throw ConfigError("geometry: entropic map requires the l1/linf norm pair");
    if (set_.kind != SetKind::Simplex) throw ConfigError("geometry: entropic map requires a simplex set");
    if (!(map_.entropy_floor > 0.0) || map_.entropy_floor * set_.dim >= 1.0)
      throw ConfigError("geometry: entropy_floor must be positive and below 1/dim");
  }
  // Both supported generators are 1-strongly convex w.r.t. their paired norm
  // (the entropic case by Pinsker on the simplex).
  map_.sigma_R = 1.0;
}

double Geometry::bregman_radius() const {
  if (map_.kind == MapKind::EuclideanHalfSq) {
    const double d = set_.diameter(NormPair{PrimalNorm::L2});
    return 0.5 * d * d;
  }
  const double n = set_.dim;
  const double f = map_.entropy_floor;
  if (set_.dim == 1) return 0.0;
  // KL between two vertices of the clamped simplex.
  return (1.0 - n * f) * std::log((1.0 - (n - 1.0) * f) / f);
}

bool Geometry::feasible(const Vec& x, double tol) const {
  return set_.contains(x, tol) && map_.in_domain(x);
}

Vec Geometry::clamp(const Vec& x) const {
  if (map_.kind == MapKind::EuclideanHalfSq) return x;
  const Vec log_x = x.array().max(0.0).log().matrix();
  return clamped_simplex_projection(log_x, map_.entropy_floor);
}

Vec Geometry::random_point(Stream& rng) const {
  const int n = set_.dim;
  switch (set_.kind) {
    case SetKind::Box: {
      Vec u(n);
      for (int i = 0; i < n; ++i) u[i] = set_.lo[i] + (set_.hi[i] - set_.lo[i]) * rng.uniform();
      return u;
    }
    case SetKind::L2Ball: {
      std::normal_distribution<double> normal;
      Vec d(n);
      for (int i = 0; i < n; ++i) d[i] = normal(rng);
      const double r = set_.radius * std::pow(rng.uniform(), 1.0 / n);
      const double len = d.norm();
      return len > 0.0 ? Vec(set_.center + d * (r / len)) : set_.center;
    }
    case SetKind::Simplex: {
      std::exponential_distribution<double> expo;
      Vec e(n);
      for (int i = 0; i < n; ++i) e[i] = expo(rng);
      e /= e.sum();
      if (map_.kind == MapKind::NegativeEntropy) {
        const double f = map_.entropy_floor;
        return (Vec::Constant(n, f) + (1.0 - n * f) * e);
      }
      return e;
    }
  }
  return {};
}

Vec Geometry::linear_minimizer(const Vec& w) const {
  Vec u = set_.linear_minimizer(w);
  if (map_.kind == MapKind::NegativeEntropy) {
    const double f = map_.entropy_floor;
    const int n = set_.dim;
    u = u * (1.0 - n * f) + Vec::Constant(n, f);
  }
  return u;
}

}  // namespace smd
