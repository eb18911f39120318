#include "smdlab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "smdlab/errors.hpp"

namespace smd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t index(Series s) { return static_cast<std::size_t>(s); }

void require_eps_p(double eps, double p) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InputError("bounds: eps must be positive");
  if (!(p > 0.0 && p < 1.0)) throw InputError("bounds: confidence p must lie in (0, 1)");
}

/// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

}  // namespace

double BiasSchedule::at(std::uint64_t t) const {
  if (t < 1) throw InputError("bias schedule: t must be >= 1");
  if (B0 == 0.0) return 0.0;
  return B0 * std::pow(double(t), -q);
}

// ---------------------------------------------------------------------------
// BoundParams

double BoundParams::default_a_ceiling() const {
  const double a1 = sched.alpha(1);
  return 2.0 * sigma_R / (a1 * a1 * kappa1);
}

void BoundParams::validate() const {
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError(std::string("bounds: ") + what + " must be >= 0");
  };
  if (!(sigma_R > 0.0)) throw InputError("bounds: sigma_R must be positive");
  if (!(kappa1 > 0.0)) throw InputError("bounds: kappa1 must be positive");
  nonneg(nu, "nu");
  nonneg(G, "G");
  nonneg(D, "D");
  nonneg(R_sup, "R_sup");
  nonneg(bias.B0, "B0");
  if (nu1 && !(*nu1 >= 0.0)) throw InputError("bounds: nu1 must be >= 0");
  if (nu2) nonneg(*nu2, "nu2");
  if (T_max < 1 || T_max > kMaxHorizon) throw InputError("bounds: T_max must lie in [1, 2^53]");
  sched.validate();
  if (a_ceiling) {
    if (!(*a_ceiling > 0.0)) throw InputError("bounds: a must be positive");
    // alpha is nonincreasing, so t = 1 is the binding step.
    const double a1 = sched.alpha(1);
    if (a1 * a1 * kappa1 / (2.0 * sigma_R) > 1.0 / *a_ceiling * (1.0 + 1e-12))
      throw InputError("bounds: alpha(t)^2 kappa1 / (2 sigma_R) <= 1/a fails at t = 1");
  }
}

// ---------------------------------------------------------------------------
// SumCache

SumCache::SumCache(const StepSchedule& sched, const BiasSchedule& bias, std::uint64_t T_max)
    : sched_(sched), bias_(bias), T_max_(T_max) {
  if (T_max < 1) throw InputError("sum cache: T_max must be >= 1");
  stored_ = std::min(T_max, kStoredPrefix);
  for (auto& v : prefix_) {
    v.resize(stored_ + 1);
    v[0] = 0.0;
  }
  std::array<long double, 5> acc{};
  for (std::uint64_t t = 1; t <= stored_; ++t) {
    const long double a = sched.alpha(t);
    const long double b = bias.at(t);
    const long double terms[5] = {a, a * a, a * b, a * a * b * b, a * a * a * a};
    for (std::size_t s = 0; s < 5; ++s) {
      acc[s] += terms[s];
      prefix_[s][t] = static_cast<double>(acc[s]);
    }
  }
}

double SumCache::coef(Series s) const {
  const double a = sched_.alpha0, b = bias_.B0;
  switch (s) {
    case Series::Alpha:
      return a;
    case Series::Alpha2:
      return a * a;
    case Series::AlphaB:
      return a * b;
    case Series::Alpha2B2:
      return a * a * b * b;
    case Series::Alpha4:
      return a * a * a * a;
  }
  return 0.0;
}

double SumCache::exponent(Series s) const {
  const double k = sched_.k, q = bias_.q;
  switch (s) {
    case Series::Alpha:
      return k;
    case Series::Alpha2:
      return 2.0 * k;
    case Series::AlphaB:
      return k + q;
    case Series::Alpha2B2:
      return 2.0 * (k + q);
    case Series::Alpha4:
      return 4.0 * k;
  }
  return 0.0;
}

double SumCache::prefix(Series s, std::uint64_t t) const {
  if (t > T_max_) throw InputError("sum cache: t beyond T_max");
  if (t <= stored_) return prefix_[index(s)][t];
  return prefix_[index(s)][stored_] + power_sum(coef(s), exponent(s), stored_ + 1, t);
}

double SumCache::power_sum(double c, double e, std::uint64_t a, std::uint64_t b) {
  if (c == 0.0 || b < a) return 0.0;
  // Euler-Maclaurin through the third derivative; for a >= 10^6 the
  // remainder is far below double resolution.
  const double x = double(a), y = double(b);
  const double L = std::log(y / x);
  const double integral = e == 1.0 ? L : std::pow(x, 1.0 - e) * std::expm1((1.0 - e) * L) / (1.0 - e);
  const double ends = 0.5 * (std::pow(x, -e) + std::pow(y, -e));
  const double d1 = -e * (std::pow(y, -e - 1.0) - std::pow(x, -e - 1.0)) / 12.0;
  const double d3 = -e * (e + 1.0) * (e + 2.0) * (std::pow(y, -e - 3.0) - std::pow(x, -e - 3.0)) / 720.0;
  return c * (integral + ends + d1 - d3);
}

bool SumCache::converges(Series s) const { return coef(s) == 0.0 || exponent(s) > 1.0; }

std::optional<Bracket> SumCache::total(Series s) const {
  const double c = coef(s);
  const double partial = prefix(s, T_max_);
  if (c == 0.0) return Bracket{partial, partial};
  const double e = exponent(s);
  if (!(e > 1.0)) return std::nullopt;
  // c * int_{T+1}^inf x^-e dx <= sum_{k>T} c k^-e <= c * int_T^inf x^-e dx
  const double T = double(T_max_);
  const double lower = c * std::pow(T + 1.0, 1.0 - e) / (e - 1.0);
  const double upper = c * std::pow(T, 1.0 - e) / (e - 1.0);
  return Bracket{partial + lower, partial + upper};
}

// ---------------------------------------------------------------------------
// K and summability

KResult compute_K(const BoundParams& params, const SumCache& sums) {
  KResult r;
  if (params.bias.B0 == 0.0) return r;
  const auto total = sums.total(Series::AlphaB);
  if (!total) {
    r.divergent = true;
    r.K = 0.0;
    r.S_lower = r.S_upper = kInf;
    return r;
  }
  r.S_lower = 2.0 * total->lower / params.sigma_R;
  r.S_upper = 2.0 * total->upper / params.sigma_R;
  r.K = std::exp(-r.S_upper);
  r.err = std::exp(-r.S_lower) - r.K;
  return r;
}

SummabilityReport summability(const StepSchedule& sched, const BiasSchedule& bias,
                              std::uint64_t T_max) {
  SumCache sums(sched, bias, T_max);
  SummabilityReport rep;
  rep.partial = sums.prefix(Series::AlphaB, T_max);
  rep.total = sums.total(Series::AlphaB);
  rep.exponent = sched.k + bias.q;
  rep.boundary = std::abs(rep.exponent - 1.0) < 1e-12 && bias.B0 != 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// BoundEvaluator

BoundEvaluator::BoundEvaluator(BoundParams params)
    : params_((params.validate(), std::move(params))),
      sums_(params_.sched, params_.bias, params_.T_max),
      K_(compute_K(params_, sums_)) {}

double BoundEvaluator::exp_S() const { return K_.divergent ? kInf : std::exp(K_.S_upper); }

double BoundEvaluator::tau(std::uint64_t t, double eps) const {
  if (t < 1) throw InputError("tau: t must be >= 1");
  if (!(eps > 0.0)) throw InputError("tau: eps must be positive");
  return eps / 3.0 * K_.K * A(t);
}

BoundValue BoundEvaluator::theorem4(std::uint64_t t, double eps) const {
  if (t < 1) throw InputError("theorem4: t must be >= 1");
  if (!(eps > 0.0)) throw InputError("theorem4: eps must be positive");
  const auto& P = params_;
  const double A_t = A(t);
  const double S2 = sums_.prefix(Series::Alpha2, t);
  const double S2B2 = sums_.prefix(Series::Alpha2B2, t);
  const double K = K_.K;

  BoundValue v;
  const double num1 = 3.0 * P.nu * P.nu * S2;
  const double num2 = 9.0 * P.D * P.D * P.kappa1 * ((P.nu * P.nu + P.G * P.G) * S2 + S2B2);
  v.term1 = num1 == 0.0 ? 0.0 : num1 / (2.0 * P.sigma_R * eps * K * A_t);
  v.term2 = num2 == 0.0 ? 0.0 : num2 / (eps * eps * K * K * A_t * A_t);
  v.raw = v.term1 + v.term2;
  v.log_raw = std::log(v.raw);
  v.clipped = std::min(1.0, v.raw);
  v.applicable = t >= t0(eps);
  return v;
}

BoundValue BoundEvaluator::theorem5(std::uint64_t t, double eps) const {
  if (t < 1) throw InputError("theorem5: t must be >= 1");
  if (!(eps > 0.0)) throw InputError("theorem5: eps must be positive");
  const auto& P = params_;
  if (!P.nu1 || !P.nu2) throw ConfigError("theorem5: sub-Gaussian constants nu1 and nu2 are required");
  const double nu1 = *P.nu1, nu2 = *P.nu2;
  const double A_t = A(t);
  const double S2 = sums_.prefix(Series::Alpha2, t);
  const double S2B2 = sums_.prefix(Series::Alpha2B2, t);
  const double S4 = sums_.prefix(Series::Alpha4, t);
  const double K = K_.K;

  // log of exp(-eps^2 K^2 A^2 / (18 D^2 nu1^2 sum alpha^2))
  double log1;
  const double denom = 18.0 * P.D * P.D * nu1 * nu1 * S2;
  if (std::isinf(nu1)) {
    log1 = 0.0;
  } else if (denom == 0.0) {
    log1 = -kInf;
  } else {
    log1 = -(eps * eps * K * K * A_t * A_t) / denom;
  }
  // log of exp(sum alpha^2 kappa1/(2 sigma) (G^2 + B^2 + nu2^2 alpha^2 kappa1/(4 sigma))) / exp(tau)
  const double c = P.kappa1 / (2.0 * P.sigma_R);
  const double log2 = c * (P.G * P.G * S2 + S2B2 + nu2 * nu2 * P.kappa1 / (4.0 * P.sigma_R) * S4) -
                      eps / 3.0 * K * A_t;

  BoundValue v;
  v.term1 = std::exp(log1);
  v.term2 = std::exp(log2);
  v.log_raw = log_add(log1, log2);
  v.raw = std::exp(v.log_raw);
  v.clipped = v.log_raw >= 0.0 ? 1.0 : v.raw;
  v.applicable = t >= t0(eps);
  return v;
}

double BoundEvaluator::deficit(Corollary which, int i, std::uint64_t t, double eps, double p) const {
  const auto& P = params_;
  const double eS = exp_S();
  const double A_t = A(t);
  const double S2 = sums_.prefix(Series::Alpha2, t);
  const double S2B2 = sums_.prefix(Series::Alpha2B2, t);
  const double p1 = 1.0 - p;

  // A RHS of exactly zero always holds, even when exp(S) is infinite.
  auto margin = [](double lhs, double scale, double rest) {
    if (rest == 0.0) return lhs;
    return lhs - scale * rest;
  };

  if (i == 0) return margin(A_t, 3.0 / eps * eS, P.R_sup + sums_.prefix(Series::AlphaB, t));

  if (which == Corollary::Variance) {
    if (i == 1) return margin(A_t, 3.0 * P.nu * P.nu / (P.sigma_R * eps * p1) * eS, S2);
    return margin(A_t * A_t, 9.0 * P.D * P.D * P.kappa1 / (eps * eps) * eS,
                  (P.nu * P.nu + P.G * P.G) * S2 + S2B2);
  }

  if (!P.nu1 || !P.nu2) throw ConfigError("corollary3: sub-Gaussian constants nu1 and nu2 are required");
  const double nu1 = *P.nu1, nu2 = *P.nu2;
  const double ln2p = std::log(2.0 / p1);
  if (i == 1) return margin(A_t * A_t, 18.0 * P.D * P.D * nu1 * nu1 / (eps * eps) * ln2p * eS * eS, S2);
  const double c = P.kappa1 / (2.0 * P.sigma_R);
  return margin(A_t, 3.0 / eps * eS,
                ln2p + c * ((P.G * P.G + nu2 * nu2 * P.kappa1 / (4.0 * P.sigma_R)) * S2 + S2B2));
}

std::uint64_t BoundEvaluator::t0(double eps) const {
  return corollary2(eps, 0.5).t0;
}

Thresholds BoundEvaluator::thresholds(Corollary which, double eps, double p) const {
  require_eps_p(eps, p);
  const std::uint64_t cap = sums_.T_max();
  Thresholds out;
  std::uint64_t* slots[3] = {&out.t0, &out.t1, &out.t2};

  for (int i = 0; i < 3; ++i) {
    auto holds = [&](std::uint64_t t) { return deficit(which, i, t, eps, p) >= 0.0; };
    if (holds(1)) {
      *slots[i] = 1;
      continue;
    }
    // Doubling to bracket the first crossing, then bisection on (lo fails, hi holds).
    std::uint64_t lo = 1, hi = 2;
    bool found = false;
    while (true) {
      if (hi >= cap) {
        hi = cap;
        found = holds(hi);
        break;
      }
      if (holds(hi)) {
        found = true;
        break;
      }
      lo = hi;
      hi *= 2;
    }
    if (!found) {
      *slots[i] = cap;
      out.resolved[std::size_t(i)] = false;
      continue;
    }
    while (hi - lo > 1) {
      const std::uint64_t mid = lo + (hi - lo) / 2;
      (holds(mid) ? hi : lo) = mid;
    }
    *slots[i] = hi;
  }
  out.t_star = std::max({out.t0, out.t1, out.t2});
  return out;
}

Thresholds BoundEvaluator::corollary2(double eps, double p) const {
  return thresholds(Corollary::Variance, eps, p);
}

Thresholds BoundEvaluator::corollary3(double eps, double p) const {
  return thresholds(Corollary::SubGaussian, eps, p);
}

}  // namespace smd
