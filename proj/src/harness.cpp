#include "smdlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "smdlab/errors.hpp"
#include "smdlab/stats.hpp"

namespace smd {

std::vector<double> TrialSet::gaps_at(std::uint64_t t) const {
  const auto it = std::find(checkpoints.begin(), checkpoints.end(), t);
  if (it == checkpoints.end()) throw InputError("trial set: checkpoint " + std::to_string(t) + " not recorded");
  const auto col = static_cast<std::size_t>(it - checkpoints.begin());
  std::vector<double> out;
  out.reserve(trials.size());
  for (const auto& r : trials) out.push_back(r.gap_z[col]);
  return out;
}

void TrialSet::merge(const TrialSet& other) {
  if (other.digest != digest || other.base_seed != base_seed || other.T != T ||
      other.checkpoints != checkpoints)
    throw InputError("trial set merge: configurations differ");
  std::vector<TrialRecord> merged;
  merged.reserve(trials.size() + other.trials.size());
  std::merge(trials.begin(), trials.end(), other.trials.begin(), other.trials.end(),
             std::back_inserter(merged),
             [](const TrialRecord& a, const TrialRecord& b) { return a.trial < b.trial; });
  for (std::size_t i = 1; i < merged.size(); ++i)
    if (merged[i].trial == merged[i - 1].trial)
      throw InputError("trial set merge: overlapping trial index " + std::to_string(merged[i].trial));
  trials = std::move(merged);
}

int default_workers() {
  if (const char* env = std::getenv("SMDLAB_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t T,
                                                 std::span<const std::uint64_t> extra) {
  if (T < 1) throw InputError("checkpoints: T must be >= 1");
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = 1; t <= T; t *= 2) {
    out.push_back(t);
    if (t > T / 2) break;
  }
  out.push_back(T);
  for (auto t : extra)
    if (t >= 1 && t <= T) out.push_back(t);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

TrialSet run_trials(const Experiment& ex, std::uint64_t n, std::uint64_t T,
                    std::vector<std::uint64_t> checkpoints, std::uint64_t base_seed,
                    std::uint64_t first_trial, int workers) {
  if (n < 1) throw InputError("run_trials: need at least one trial");
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());
  if (checkpoints.empty() || checkpoints.front() < 1 || checkpoints.back() > T)
    throw InputError("run_trials: checkpoints must lie in [1, T]");

  TrialSet ts;
  ts.digest = ex.digest;
  ts.base_seed = base_seed;
  ts.T = T;
  ts.checkpoints = checkpoints;
  ts.trials.resize(n);

  std::atomic<std::uint64_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_err;
  std::uint64_t first_err_trial = std::numeric_limits<std::uint64_t>::max();

  auto work = [&] {
    for (std::uint64_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      TrialRecord rec;
      rec.trial = first_trial + i;
      rec.gap_z.resize(checkpoints.size());
      try {
        RunOptions opt;
        opt.T = T;
        opt.seed = base_seed;
        opt.trial = rec.trial;
        std::size_t c = 0;
        iterate(ex, opt, [&](const StepView& v) {
          if (c < checkpoints.size() && v.t == checkpoints[c]) rec.gap_z[c++] = v.gap_z;
        });
      } catch (const NumericalError& e) {
        std::lock_guard lock(err_mu);
        if (rec.trial < first_err_trial) {
          first_err_trial = rec.trial;
          first_err = std::make_exception_ptr(NumericalError(
              std::string(e.what()) + " (trial " + std::to_string(rec.trial) + ")", e.step(),
              std::int64_t(rec.trial)));
        }
        continue;
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (rec.trial < first_err_trial) {
          first_err_trial = rec.trial;
          first_err = std::current_exception();
        }
        continue;
      }
      ts.trials[i] = std::move(rec);
    }
  };

  const int nw = std::max(1, std::min<int>(workers > 0 ? workers : default_workers(), int(n)));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
  }
  if (first_err) std::rethrow_exception(first_err);
  return ts;
}

TailEstimate tail_probability(const TrialSet& ts, std::uint64_t t, double eps, double gamma) {
  const auto gaps = ts.gaps_at(t);
  if (gaps.empty()) throw InputError("tail_probability: empty trial set");
  TailEstimate est;
  est.t = t;
  est.eps = eps;
  est.gamma = gamma;
  est.n = gaps.size();
  est.successes = static_cast<std::uint64_t>(
      std::count_if(gaps.begin(), gaps.end(), [eps](double g) { return g >= eps; }));
  est.p_hat = double(est.successes) / double(est.n);
  const auto ci = clopper_pearson(est.successes, est.n, gamma);
  est.ci_low = ci.low;
  est.ci_high = ci.high;
  return est;
}

RateFit fit_loglog(std::span<const double> t, std::span<const double> gap) {
  if (t.size() != gap.size()) throw InputError("fit: size mismatch");
  RateFit fit;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(gap[i] > 0.0)) {
      fit.flagged = true;
      continue;
    }
    xs.push_back(std::log(t[i]));
    ys.push_back(std::log(gap[i]));
  }
  fit.points = xs.size();
  if (fit.flagged) {
    fit.slope = std::numeric_limits<double>::quiet_NaN();
    fit.stderr = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  if (xs.size() < 2) throw InputError("fit: need at least two points");
  const double n = double(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  if (xs.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = ys[i] - (my + fit.slope * (xs[i] - mx));
      ssr += r * r;
    }
    fit.stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

RateFit fit_rate(const TrialSet& ts, std::uint64_t t_lo, std::uint64_t t_hi) {
  std::vector<double> t, med;
  for (auto c : ts.checkpoints) {
    if (c < t_lo || c > t_hi) continue;
    const auto g = ts.gaps_at(c);
    t.push_back(double(c));
    med.push_back(median(g));
  }
  if (t.size() < 4) throw InputError("fit_rate: need at least 4 checkpoints in range");
  return fit_loglog(t, med);
}

Comparison compare_bound(const TailEstimate& est, double bound) {
  return {est.ci_low <= bound ? Verdict::Consistent : Verdict::Violation, bound - est.p_hat};
}

double default_kappa1(const Geometry& geom) {
  return geom.norms().primal == PrimalNorm::L2 ? 3.0 : 3.0 * geom.dim();
}

BoundParams bound_params_for(const Experiment& ex, const BoundOverrides& ov,
                             std::optional<double> estimated_nu2) {
  BoundParams bp;
  bp.sigma_R = ex.geometry.map().sigma_R;
  bp.nu = ex.oracle.noise.nu;
  bp.G = ex.problem.G();
  bp.D = ex.geometry.diameter();
  bp.R_sup = ex.geometry.bregman_radius();
  bp.kappa1 = ov.kappa1.value_or(default_kappa1(ex.geometry));
  bp.nu1 = ex.oracle.noise.nu1;
  bp.nu2 = ov.nu2 ? ov.nu2 : estimated_nu2;
  bp.sched = ex.schedule;
  bp.T_max = ov.T_max;
  const auto& bias = ex.oracle.bias;
  switch (bias.kind) {
    case BiasKind::None:
      bp.bias = {0.0, 1.0};
      break;
    case BiasKind::FixedDirection:
    case BiasKind::Adversarial:
      bp.bias = {bias.B0, bias.q};
      break;
    case BiasKind::ZerothOrderImplicit:
      bp.bias = {bias.c_zo * ex.oracle.smoothing.mu0, ex.oracle.smoothing.r};
      break;
  }
  bp.a_ceiling = ov.a_ceiling ? ov.a_ceiling : std::optional<double>(bp.default_a_ceiling());
  return bp;
}

}  // namespace smd
