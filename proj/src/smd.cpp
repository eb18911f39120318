#include "smdlab/smd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smdlab/errors.hpp"

namespace smd {

void StepSchedule::validate() const {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ConfigError("schedule: alpha0 must be positive");
  if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("schedule: decay exponent k must be >= 0");
}

std::vector<std::string> StepSchedule::warnings() const {
  std::vector<std::string> w;
  if (!(k > 0.5 && k <= 1.0))
    w.push_back("step schedule exponent k=" + std::to_string(k) +
                " is outside (1/2, 1]: sum alpha = inf with sum alpha^2 < inf fails");
  return w;
}

double StepSchedule::alpha(std::uint64_t t) const {
  if (t < 1) throw InputError("schedule: t must be >= 1");
  return k == 0.0 ? alpha0 : alpha0 * std::pow(double(t), -k);
}

Vec Experiment::start_point() const {
  if (x1) return *x1;
  return geometry.clamp(geometry.set().analytic_center());
}

Vec Experiment::reference_optimum() const { return geometry.clamp(problem.x_star()); }

bool keep_row(std::uint64_t t, std::uint64_t T) {
  if (T <= 10000) return true;
  return (t & (t - 1)) == 0 || t + 100 > T;
}

Vec ergodic_update(const Vec& z_prev, const Vec& x_t, double alpha_t, double A_t) {
  if (!(alpha_t > 0.0) || A_t < alpha_t) throw InputError("ergodic_update: need A_t >= alpha_t > 0");
  const double beta = alpha_t / A_t;
  if (beta == 1.0) return x_t;
  return beta * x_t + (1.0 - beta) * z_prev;
}

namespace {

struct BerTerms {
  double residual;
  double scale;
};

BerTerms ber_terms(const MirrorMap& map, const Vec& x_t, const Vec& x_next, const Vec& x_ref,
                   const Vec& gtilde, double alpha, double sigma_R, const NormPair& norms) {
  const double d_next = bregman(map, x_ref, x_next);
  const double d_prev = bregman(map, x_ref, x_t);
  const double lin = alpha * gtilde.dot(x_ref - x_t);
  const double gd = norms.dual_norm(gtilde);
  const double quad = alpha * alpha / (2.0 * sigma_R) * gd * gd;
  return {d_next - (d_prev + lin + quad),
          1.0 + std::abs(d_next) + std::abs(d_prev) + std::abs(lin) + std::abs(quad)};
}

double opt_term(const MirrorMap& map, const Vec& x_t, const Vec& x_next, const Vec& gtilde,
                double alpha, const Vec& u) {
  return alpha * gtilde.dot(u - x_next) + (map.gradient(x_next) - map.gradient(x_t)).dot(u - x_next);
}

}  // namespace

AuditRecord audit_step(const MirrorMap& map, const Vec& x_t, const Vec& x_next, const Vec& x_ref,
                       const Vec& gtilde, double alpha, double sigma_R, const NormPair& norms) {
  const auto b = ber_terms(map, x_t, x_next, x_ref, gtilde, alpha, sigma_R, norms);
  return {b.residual, b.scale, opt_term(map, x_t, x_next, gtilde, alpha, x_ref)};
}

AuditRecord audit_step(const Geometry& geom, const Vec& x_t, const Vec& x_next,
                       const std::vector<Vec>& refs, const Vec& gtilde, double alpha) {
  const auto& map = geom.map();
  AuditRecord rec;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& ref : refs) {
    const auto b = ber_terms(map, x_t, x_next, ref, gtilde, alpha, map.sigma_R, geom.norms());
    if (b.residual / b.scale > worst) {
      worst = b.residual / b.scale;
      rec.ber_residual = b.residual;
      rec.ber_scale = b.scale;
    }
  }
  // The optimality expression is affine in u, so its minimum over the set is
  // attained at the linear minimizer of w = alpha g~ + grad R(x+) - grad R(x).
  const Vec w = alpha * gtilde + map.gradient(x_next) - map.gradient(x_t);
  double best = w.dot(geom.linear_minimizer(w) - x_next);
  for (const auto& ref : refs) best = std::min(best, opt_term(map, x_t, x_next, gtilde, alpha, ref));
  rec.opt_residual = best;
  return rec;
}

Vec iterate(const Experiment& ex, const RunOptions& opt, const StepObserver& observe) {
  if (opt.T < 1) throw InputError("run: horizon T must be >= 1");
  const auto& geom = ex.geometry;
  const auto& prob = ex.problem;
  if (geom.dim() != prob.dim()) throw ConfigError("run: geometry and problem dimensions differ");

  Vec x = ex.start_point();
  if (x.size() != prob.dim() || !geom.feasible(x)) throw InputError("run: start point is infeasible");

  const Vec x_opt = ex.reference_optimum();
  Vec z = x;
  double A = 0.0;
  std::vector<Vec> refs;

  for (std::uint64_t t = 1; t <= opt.T; ++t) {
    const double alpha = ex.schedule.alpha(t);
    A += alpha;
    z = ergodic_update(z, x, alpha, A);

    Stream rng(opt.seed, opt.trial, t, StreamPurpose::Oracle);
    const Vec gt = draw_gradient(ex.oracle, prob, geom.norms(), x, t, rng);
    if (!gt.allFinite()) throw NumericalError("non-finite stochastic subgradient", t, std::int64_t(opt.trial));
    Vec x_next = mirror_step(geom, x, gt, alpha);
    if (!x_next.allFinite()) throw NumericalError("non-finite iterate", t, std::int64_t(opt.trial));

    const double gap_x = prob.gap(x);
    const double gap_z = prob.gap(z);

    AuditRecord rec;
    const AuditRecord* rec_ptr = nullptr;
    if (opt.audit) {
      refs.assign(1, x_opt);
      Stream arng(opt.seed, opt.trial, t, StreamPurpose::Audit);
      for (int i = 0; i < opt.audit_random_refs; ++i) refs.push_back(geom.random_point(arng));
      rec = audit_step(geom, x, x_next, refs, gt, alpha);
      rec_ptr = &rec;
    }

    if (observe) observe(StepView{t, x, z, x_next, gt, alpha, gap_x, gap_z, rec_ptr});
    x = std::move(x_next);
  }
  return x;
}

Trace run(const Experiment& ex, const RunOptions& opt) {
  Trace tr;
  tr.digest = ex.digest;
  tr.seed = opt.seed;
  tr.trial = opt.trial;
  tr.T = opt.T;
  tr.rows.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(opt.T, 10000 + 200)));
  tr.x_final = iterate(ex, opt, [&](const StepView& v) {
    if (!keep_row(v.t, opt.T)) return;
    TraceRow row;
    row.t = v.t;
    row.x = v.x;
    row.z = v.z;
    row.gap_x = v.gap_x;
    row.gap_z = v.gap_z;
    row.gtilde = v.gtilde;
    if (v.audit) row.audit = *v.audit;
    tr.rows.push_back(std::move(row));
  });
  return tr;
}

}  // namespace smd
