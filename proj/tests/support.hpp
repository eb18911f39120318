#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "smdlab/geometry.hpp"
#include "smdlab/rng.hpp"

namespace smdtest {

using smd::Vec;

/// Brute-force minimizer of a convex function over a box-shaped search
/// region intersected with a feasibility predicate: a coarse grid, then
/// repeated zooms around the incumbent.
inline Vec grid_argmin(const std::function<double(const Vec&)>& f,
                       const std::function<bool(const Vec&)>& feasible, Vec lo, Vec hi,
                       int per_dim = 21, double resolution = 1e-10) {
  const int n = static_cast<int>(lo.size());
  Vec best = lo;
  double best_val = std::numeric_limits<double>::infinity();
  for (int round = 0; round < 200; ++round) {
    const Vec h = (hi - lo) / double(per_dim - 1);
    std::vector<int> idx(std::size_t(n), 0);
    while (true) {
      Vec u(n);
      for (int i = 0; i < n; ++i) u[i] = lo[i] + h[i] * idx[std::size_t(i)];
      if (feasible(u)) {
        const double v = f(u);
        if (v < best_val) {
          best_val = v;
          best = u;
        }
      }
      int i = 0;
      while (i < n && ++idx[std::size_t(i)] == per_dim) idx[std::size_t(i++)] = 0;
      if (i == n) break;
    }
    if (h.maxCoeff() < resolution) break;
    // Halving keeps the true minimizer inside the window even when the
    // incumbent sits a few cells away from it.
    const Vec half = (hi - lo) / 4.0;
    lo = best - half;
    hi = best + half;
  }
  return best;
}

/// Uniform point of [lo, hi].
inline Vec uniform_in(smd::Stream& rng, const Vec& lo, const Vec& hi) {
  Vec u(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) u[i] = lo[i] + (hi[i] - lo[i]) * rng.uniform();
  return u;
}

/// Point of the probability simplex with every coordinate >= floor.
inline Vec simplex_point(smd::Stream& rng, int n, double floor = 1e-6) {
  Vec e(n);
  for (int i = 0; i < n; ++i) e[i] = -std::log(1.0 - rng.uniform());
  e /= e.sum();
  e = e.array() * (1.0 - n * floor) + floor;
  return e;
}

inline long double kl(const Vec& x, const Vec& y) {
  long double s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    s += (long double)x[i] * std::log((long double)x[i] / (long double)y[i]) - x[i] + y[i];
  return s;
}

/// Subproblem objective <g, u - x> + D(u, x) / alpha, evaluated from scratch.
inline double subproblem(const smd::MirrorMap& map, const Vec& x, const Vec& g, double alpha, const Vec& u) {
  double d;
  if (map.kind == smd::MapKind::EuclideanHalfSq)
    d = 0.5 * (u - x).squaredNorm();
  else
    d = double(kl(u, x));
  return g.dot(u - x) + d / alpha;
}

/// Brute-force mirror step over the set (simplex searched through its first n-1 coordinates).
inline Vec brute_step(const smd::MirrorMap& map, const smd::ConstraintSet& set, const Vec& x, const Vec& g, double alpha) {
  const int n = set.dim;
  if (set.kind == smd::SetKind::Simplex) {
    const double fl = map.entropy_floor;
    auto lift = [&](const Vec& y) {
      Vec u(n);
      u.head(n - 1) = y;
      u[n - 1] = 1.0 - y.sum();
      return u;
    };
    const Vec y = grid_argmin([&](const Vec& y) { return subproblem(map, x, g, alpha, lift(y)); },
                              [&](const Vec& y) { return (lift(y).array() >= fl).all(); },
                              Vec::Constant(n - 1, fl), Vec::Constant(n - 1, 1.0));
    return lift(y);
  }
  if (set.kind == smd::SetKind::Box)
    return grid_argmin([&](const Vec& u) { return subproblem(map, x, g, alpha, u); },
                       [&](const Vec& u) { return set.contains(u, 0.0); }, set.lo, set.hi);
  // Ball: the cube [-1, 1]^n mapped bijectively onto it by radial stretching.
  auto onto = [&](const Vec& u) {
    const double r2 = u.norm();
    return r2 == 0.0 ? set.center : Vec(set.center + set.radius * u * (u.lpNorm<Eigen::Infinity>() / r2));
  };
  return onto(grid_argmin([&](const Vec& u) { return subproblem(map, x, g, alpha, onto(u)); },
                          [](const Vec& u) { return u.lpNorm<Eigen::Infinity>() <= 1.0; },
                          Vec::Constant(n, -1.0), Vec::Constant(n, 1.0)));
}

}  // namespace smdtest
