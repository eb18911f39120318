#include "smdlab/oracle.hpp"

#include <cmath>
#include <random>

#include "smdlab/errors.hpp"
#include "smdlab/stats.hpp"

namespace smd {

double SmoothingSchedule::mu(std::uint64_t t) const {
  if (t < 1) throw InputError("smoothing: t must be >= 1");
  return mu0 * std::pow(double(t), -r);
}

std::string to_string(BiasKind kind) {
  switch (kind) {
    case BiasKind::None:
      return "none";
    case BiasKind::FixedDirection:
      return "fixed";
    case BiasKind::Adversarial:
      return "adversarial";
    case BiasKind::ZerothOrderImplicit:
      return "zeroth_order";
  }
  return "?";
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::GaussianIso:
      return "gaussian";
    case NoiseKind::BoundedUniform:
      return "uniform";
    case NoiseKind::StudentT:
      return "student_t";
  }
  return "?";
}

double bias_bound(const OracleConfig& cfg, std::uint64_t t) {
  if (t < 1) throw InputError("bias_bound: t must be >= 1");
  switch (cfg.bias.kind) {
    case BiasKind::None:
      return 0.0;
    case BiasKind::FixedDirection:
    case BiasKind::Adversarial:
      return cfg.bias.B0 * std::pow(double(t), -cfg.bias.q);
    case BiasKind::ZerothOrderImplicit:
      return cfg.bias.c_zo * cfg.smoothing.mu(t);
  }
  return 0.0;
}

Vec bias_vector(const OracleConfig& cfg, const Problem& p, const NormPair& norms, const Vec& x,
                std::uint64_t t) {
  const int n = p.dim();
  switch (cfg.bias.kind) {
    case BiasKind::None:
      return Vec::Zero(n);
    case BiasKind::FixedDirection: {
      const double len = norms.dual_norm(cfg.bias.direction);
      if (cfg.bias.direction.size() != n || !(len > 0.0))
        throw ConfigError("bias: fixed direction must be a nonzero vector of the problem dimension");
      return cfg.bias.direction * (bias_bound(cfg, t) / len);
    }
    case BiasKind::Adversarial: {
      // Unit dual-norm u maximizing <u, x* - x>: the normalized difference for
      // L2, its sign pattern for the l1/linf pair.
      const Vec d = p.x_star() - x;
      Vec u;
      if (norms.primal == PrimalNorm::L2) {
        const double len = d.norm();
        u = len > 0.0 ? Vec(d / len) : Vec::Zero(n);
      } else {
        u = d.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      }
      return u * bias_bound(cfg, t);
    }
    case BiasKind::ZerothOrderImplicit:
      break;
  }
  throw ConfigError("bias: zeroth-order bias is implicit; use zo_sample");
}

Vec draw_noise(const NoiseModel& noise, int dim, Stream& rng) {
  Vec z(dim);
  switch (noise.kind) {
    case NoiseKind::GaussianIso: {
      if (noise.sigma == 0.0) return Vec::Zero(dim);
      std::normal_distribution<double> normal(0.0, noise.sigma);
      for (int i = 0; i < dim; ++i) z[i] = normal(rng);
      break;
    }
    case NoiseKind::BoundedUniform:
      for (int i = 0; i < dim; ++i) z[i] = noise.radius * (2.0 * rng.uniform() - 1.0);
      break;
    case NoiseKind::StudentT: {
      std::student_t_distribution<double> st(noise.dof);
      for (int i = 0; i < dim; ++i) z[i] = noise.scale * st(rng);
      break;
    }
  }
  return z;
}

Vec sample(const OracleConfig& cfg, const Problem& p, const NormPair& norms, const Vec& x,
           std::uint64_t t, Stream& rng) {
  if (cfg.zeroth_order()) throw ConfigError("sample: zeroth-order oracle must use zo_sample");
  if (t < 1) throw InputError("sample: t must be >= 1");
  Vec g = p.subgrad(x);
  g += bias_vector(cfg, p, norms, x, t);
  g += draw_noise(cfg.noise, p.dim(), rng);
  return g;
}

Vec zo_sample(const Problem& p, const Vec& x, double mu, Stream& rng) {
  if (!(mu > 0.0)) throw InputError("zo_sample: mu must be positive");
  std::normal_distribution<double> normal;
  Vec u(p.dim());
  for (int i = 0; i < p.dim(); ++i) u[i] = normal(rng);
  const double diff = p.value(x + mu * u) - p.value(x);
  return (diff / mu) * u;
}

Vec draw_gradient(const OracleConfig& cfg, const Problem& p, const NormPair& norms, const Vec& x,
                  std::uint64_t t, Stream& rng) {
  if (cfg.zeroth_order()) return zo_sample(p, x, cfg.smoothing.mu(t), rng);
  return sample(cfg, p, norms, x, t, rng);
}

MomentEstimate estimate_moments(const OracleConfig& cfg, const Problem& p, const NormPair& norms,
                                const Vec& x, std::uint64_t t, std::uint64_t n,
                                std::uint64_t seed) {
  if (n < 10000) throw InputError("estimate_moments: need at least 10^4 draws");
  if (t < 1) throw InputError("estimate_moments: t must be >= 1");
  const int dim = p.dim();
  const Vec g = p.subgrad(x);
  const bool zo = cfg.zeroth_order();
  const Vec b = zo ? Vec::Zero(dim) : bias_vector(cfg, p, norms, x, t);
  const double mu = zo ? cfg.smoothing.mu(t) : 0.0;

  // Draw i is (g~_i, zeta_i). For explicit kinds zeta is the raw noise draw, so
  // a noiseless oracle gives exact zeros.
  auto draw = [&](std::uint64_t i, Vec& gt, Vec& zeta) {
    Stream rng(seed, i, t, StreamPurpose::Moments);
    if (zo) {
      gt = zo_sample(p, x, mu, rng);
      zeta = gt - g;
    } else {
      zeta = draw_noise(cfg.noise, dim, rng);
      gt = g + b + zeta;
    }
  };

  const double dn = double(n);
  Vec sum = Vec::Zero(dim), sum_sq = Vec::Zero(dim);
  double s2 = 0.0, s2sq = 0.0;
  Vec gt, zeta;
  for (std::uint64_t i = 0; i < n; ++i) {
    draw(i, gt, zeta);
    sum += zeta;
    sum_sq += zeta.cwiseProduct(zeta);
    const double q = std::pow(norms.dual_norm(gt), 2);
    s2 += q;
    s2sq += q * q;
  }

  MomentEstimate est;
  est.n = n;
  est.zeta_mean = sum / dn;
  const Vec var = (sum_sq / dn - est.zeta_mean.cwiseProduct(est.zeta_mean)).cwiseMax(0.0);
  est.zeta_se = (var / dn).cwiseSqrt();
  est.mean_dev = norms.dual_norm(est.zeta_mean);
  est.m2 = s2 / dn;
  est.m2_se = std::sqrt(std::max(0.0, s2sq / dn - est.m2 * est.m2) / dn);

  // Fourth moment of the centered noise. The zeroth-order noise is centered at
  // its sample mean since its bias is unknown.
  const Vec center = zo ? est.zeta_mean : Vec::Zero(dim);
  double s4 = 0.0, s4sq = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    draw(i, gt, zeta);
    const double q = std::pow(norms.dual_norm(zeta - center), 4);
    s4 += q;
    s4sq += q * q;
  }
  est.m4 = s4 / dn;
  est.m4_se = std::sqrt(std::max(0.0, s4sq / dn - est.m4 * est.m4) / dn);
  est.nu2_hat = std::sqrt(est.m4 + 3.0 * est.m4_se);
  return est;
}

TailCheck subgaussian_tail_check(const NoiseModel& noise, int dim, const NormPair& norms,
                                 double nu1, std::uint64_t n, std::uint64_t seed, int directions,
                                 double gamma) {
  if (!(nu1 > 0.0)) throw InputError("tail check: nu1 must be positive");
  if (n == 0 || directions < 1) throw InputError("tail check: need draws and directions");

  std::vector<Vec> dirs;
  {
    Stream rng(seed, 0, 0, StreamPurpose::Diagnostic);
    std::normal_distribution<double> normal;
    while (static_cast<int>(dirs.size()) < directions) {
      Vec u(dim);
      for (int i = 0; i < dim; ++i) u[i] = normal(rng);
      const double len = norms.primal_norm(u);
      if (len > 0.0) dirs.push_back(u / len);
    }
  }

  const double levels[3] = {1.0 * nu1, 2.0 * nu1, 3.0 * nu1};
  std::vector<std::uint64_t> hits(dirs.size() * 3, 0);
  for (std::uint64_t j = 0; j < n; ++j) {
    Stream rng(seed, j, 1, StreamPurpose::Diagnostic);
    const Vec z = draw_noise(noise, dim, rng);
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      const double proj = dirs[d].dot(z);
      for (int l = 0; l < 3; ++l)
        if (proj >= levels[l]) ++hits[d * 3 + l];
    }
  }

  TailCheck out;
  for (std::size_t d = 0; d < dirs.size(); ++d)
    for (int l = 0; l < 3; ++l) {
      TailCheckRow row;
      row.direction = static_cast<int>(d);
      row.s = levels[l];
      row.hits = hits[d * 3 + l];
      row.p_hat = double(row.hits) / double(n);
      row.ci_low = clopper_pearson_lower(row.hits, n, gamma);
      row.bound = std::exp(-row.s * row.s / (2.0 * nu1 * nu1));
      row.ok = row.ci_low <= row.bound;
      out.passed = out.passed && row.ok;
      out.rows.push_back(row);
    }
  return out;
}

bool OracleContracts::passed() const {
  return zero_mean && second_moment && bias_envelope && (!subgaussian || subgaussian->passed);
}

OracleContracts check_oracle(const OracleConfig& cfg, const Problem& p, const NormPair& norms,
                             const Vec& x, std::uint64_t t, std::uint64_t n, std::uint64_t seed) {
  OracleContracts out;
  out.moments = estimate_moments(cfg, p, norms, x, t, n, seed);
  const auto& m = out.moments;
  if (cfg.zeroth_order()) {
    // Zeroth-order noise is only zero-mean around the implicit bias, which is
    // checked against the declared envelope instead.
    out.bias_envelope = m.mean_dev <= bias_bound(cfg, t) + 4.0 * norms.dual_norm(m.zeta_se);
  } else {
    for (Eigen::Index i = 0; i < m.zeta_mean.size(); ++i)
      if (std::abs(m.zeta_mean[i]) > 4.0 * m.zeta_se[i]) out.zero_mean = false;
  }
  const double nu = cfg.noise.nu;
  out.second_moment = m.m2 <= nu * nu + 4.0 * m.m2_se;
  if (cfg.noise.nu1 && !cfg.zeroth_order())
    out.subgaussian = subgaussian_tail_check(cfg.noise, p.dim(), norms, *cfg.noise.nu1, n, seed);
  return out;
}

}  // namespace smd
