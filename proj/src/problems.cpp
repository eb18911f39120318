#include "smdlab/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smdlab/errors.hpp"

namespace smd {

namespace {

bool is_diagonal(const Eigen::MatrixXd& A) {
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      if (i != j && A(i, j) != 0.0) return false;
  return true;
}

double dual_of_sign_vector(const NormPair& norms, int dim) {
  return norms.primal == PrimalNorm::L2 ? std::sqrt(double(dim)) : 1.0;
}

double piecewise_value(const ProblemParams& p, const Vec& x) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.pieces.size(); ++i) best = std::max(best, p.pieces[i].dot(x) + p.offsets[i]);
  return best;
}

/// Minimum of a max-of-affine function over a 1-D or 2-D box. The LP optimum
/// sits at a vertex: a box corner, a box edge meeting a pairwise-equality line,
/// or a point where three pieces tie.
std::pair<Vec, double> piecewise_minimum(const ProblemParams& p, const ConstraintSet& box) {
  const int n = box.dim;
  std::vector<Vec> cand;
  const double eps = 1e-12;

  auto push_if_inside = [&](Vec x) {
    if (!x.allFinite()) return;
    if (box.contains(x, 1e-10)) cand.push_back(x.cwiseMax(box.lo).cwiseMin(box.hi));
  };

  const std::size_t m = p.pieces.size();
  if (n == 1) {
    push_if_inside(box.lo);
    push_if_inside(box.hi);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        const double da = p.pieces[i][0] - p.pieces[j][0];
        if (std::abs(da) < eps) continue;
        Vec x(1);
        x[0] = (p.offsets[j] - p.offsets[i]) / da;
        push_if_inside(x);
      }
  } else {
    for (int c = 0; c < 4; ++c) {
      Vec x(2);
      x[0] = (c & 1) ? box.hi[0] : box.lo[0];
      x[1] = (c & 2) ? box.hi[1] : box.lo[1];
      push_if_inside(x);
    }
    // Pairwise equality lines: (a_i - a_j) . x = c_j - c_i.
    std::vector<std::pair<Eigen::Vector2d, double>> lines;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = i + 1; j < m; ++j) {
        const Eigen::Vector2d d = p.pieces[i] - p.pieces[j];
        if (d.norm() < eps) continue;
        lines.emplace_back(d, p.offsets[j] - p.offsets[i]);
      }
    for (const auto& [d, r] : lines) {
      for (int axis = 0; axis < 2; ++axis) {
        const int other = 1 - axis;
        if (std::abs(d[other]) < eps) continue;
        for (double fixed : {box.lo[axis], box.hi[axis]}) {
          Vec x(2);
          x[axis] = fixed;
          x[other] = (r - d[axis] * fixed) / d[other];
          push_if_inside(x);
        }
      }
    }
    for (std::size_t u = 0; u < lines.size(); ++u)
      for (std::size_t v = u + 1; v < lines.size(); ++v) {
        Eigen::Matrix2d M;
        M.row(0) = lines[u].first.transpose();
        M.row(1) = lines[v].first.transpose();
        if (std::abs(M.determinant()) < eps) continue;
        const Eigen::Vector2d rhs(lines[u].second, lines[v].second);
        push_if_inside(Vec(M.partialPivLu().solve(rhs)));
      }
  }

  Vec best_x;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : cand) {
    const double v = piecewise_value(p, x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  return {best_x, best};
}

}  // namespace

Problem make_problem(ProblemKind kind, int dim, ProblemParams params, ConstraintSet set,
                     const NormPair& norms) {
  if (dim < 1) throw ConfigError("problem: dimension must be positive");
  if (set.dim != dim) throw ConfigError("problem: set dimension does not match problem dimension");

  Problem p;
  p.kind_ = kind;
  p.dim_ = dim;
  p.set_ = set;

  switch (kind) {
    case ProblemKind::Quadratic: {
      const auto& A = params.A;
      const auto& b = params.b;
      if (A.rows() != dim || A.cols() != dim || b.size() != dim)
        throw ConfigError("quadratic: A must be dim x dim and b must have dim entries");
      if (!A.allFinite() || !b.allFinite()) throw ConfigError("quadratic: non-finite parameters");
      if (!is_diagonal(A))
        throw ConfigError("quadratic: closed-form optimum requires a diagonal A");
      const Vec a = A.diagonal();
      if ((a.array() < 0.0).any()) throw ConfigError("quadratic: A must be positive semidefinite");

      if (set.kind == SetKind::Box) {
        Vec x(dim);
        Vec m(dim);
        for (int i = 0; i < dim; ++i) {
          if (a[i] > 0.0) {
            x[i] = std::clamp(b[i] / a[i], set.lo[i], set.hi[i]);
          } else {
            x[i] = b[i] > 0.0 ? set.hi[i] : (b[i] < 0.0 ? set.lo[i] : 0.5 * (set.lo[i] + set.hi[i]));
          }
          // The i-th gradient coordinate is affine in x_i, extreme at the bounds.
          m[i] = std::max(std::abs(a[i] * set.lo[i] - b[i]), std::abs(a[i] * set.hi[i] - b[i]));
        }
        p.x_star_ = x;
        p.G_ = norms.primal == PrimalNorm::L2 ? m.norm() : m.maxCoeff();
      } else if (set.kind == SetKind::L2Ball) {
        const double s = a[0];
        if ((a.array() != s).any())
          throw ConfigError("quadratic on a ball: A must be a multiple of the identity");
        Vec x;
        if (s > 0.0) {
          const Vec u = b / s;
          const Vec d = u - set.center;
          x = d.norm() <= set.radius ? u : Vec(set.center + d * (set.radius / d.norm()));
        } else {
          const double bn = b.norm();
          x = bn > 0.0 ? Vec(set.center + set.radius * b / bn) : set.center;
        }
        p.x_star_ = x;
        const Vec g0 = s * set.center - b;
        p.G_ = norms.primal == PrimalNorm::L2 ? g0.norm() + s * set.radius
                                              : g0.cwiseAbs().maxCoeff() + s * set.radius;
      } else {
        throw ConfigError("quadratic: no closed-form optimum on the simplex");
      }
      break;
    }

    case ProblemKind::PiecewiseLinearMax: {
      if (params.pieces.empty() || params.pieces.size() != params.offsets.size())
        throw ConfigError("piecewise max: need matching pieces and offsets");
      for (const auto& a : params.pieces)
        if (a.size() != dim || !a.allFinite()) throw ConfigError("piecewise max: bad piece");
      if (set.kind != SetKind::Box || dim > 2)
        throw ConfigError("piecewise max: closed-form optimum only on 1-D/2-D boxes");
      p.params_ = params;
      auto [x, v] = piecewise_minimum(params, set);
      p.x_star_ = x;
      double g = 0.0;
      for (const auto& a : params.pieces) g = std::max(g, norms.dual_norm(a));
      p.G_ = g;
      break;
    }

    case ProblemKind::L1Norm: {
      const auto& s = params.shift;
      if (s.size() != dim || !s.allFinite()) throw ConfigError("l1norm: shift must have dim entries");
      if (set.kind == SetKind::Box) {
        p.x_star_ = s.cwiseMax(set.lo).cwiseMin(set.hi);
      } else if (set.contains(s, 1e-12)) {
        p.x_star_ = s;
      } else {
        throw ConfigError("l1norm: shift outside the set has no closed-form optimum");
      }
      p.G_ = dual_of_sign_vector(norms, dim);
      break;
    }

    case ProblemKind::LinearOnSimplex: {
      const auto& c = params.cost;
      if (c.size() != dim || !c.allFinite()) throw ConfigError("linear: cost must have dim entries");
      if (set.kind != SetKind::Simplex) throw ConfigError("linear: requires a simplex set");
      Eigen::Index best = 0;
      c.minCoeff(&best);
      p.x_star_ = Vec::Zero(dim);
      p.x_star_[best] = 1.0;
      p.G_ = norms.dual_norm(c);
      break;
    }
  }

  p.params_ = std::move(params);
  p.f_star_ = p.value(p.x_star_);
  return p;
}

double Problem::value(const Vec& x) const {
  if (x.size() != dim_ || !x.allFinite()) throw InputError("value: bad point");
  switch (kind_) {
    case ProblemKind::Quadratic:
      return 0.5 * x.dot(params_.A * x) - params_.b.dot(x);
    case ProblemKind::PiecewiseLinearMax:
      return piecewise_value(params_, x);
    case ProblemKind::L1Norm:
      return (x - params_.shift).lpNorm<1>();
    case ProblemKind::LinearOnSimplex:
      return params_.cost.dot(x);
  }
  return 0.0;
}

Vec Problem::subgrad(const Vec& x) const {
  if (x.size() != dim_ || !x.allFinite()) throw InputError("subgrad: bad point");
  switch (kind_) {
    case ProblemKind::Quadratic:
      return params_.A * x - params_.b;
    case ProblemKind::PiecewiseLinearMax: {
      std::size_t arg = 0;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < params_.pieces.size(); ++i) {
        const double v = params_.pieces[i].dot(x) + params_.offsets[i];
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      return params_.pieces[arg];
    }
    case ProblemKind::L1Norm: {
      Vec g(dim_);
      for (int i = 0; i < dim_; ++i) {
        const double d = x[i] - params_.shift[i];
        g[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
      }
      return g;
    }
    case ProblemKind::LinearOnSimplex:
      return params_.cost;
  }
  return {};
}

double Problem::gap(const Vec& x) const {
  if (!set_.contains(x, 1e-9)) throw InputError("gap: point is infeasible");
  return value(x) - f_star_;
}

std::string Problem::name() const {
  switch (kind_) {
    case ProblemKind::Quadratic:
      return "quadratic";
    case ProblemKind::PiecewiseLinearMax:
      return "pwl_max";
    case ProblemKind::L1Norm:
      return "l1norm";
    case ProblemKind::LinearOnSimplex:
      return "linear_simplex";
  }
  return "?";
}

}  // namespace smd
