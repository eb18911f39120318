#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smdlab/geometry.hpp"
#include "smdlab/problems.hpp"
#include "smdlab/rng.hpp"

namespace smd {

enum class BiasKind { None, FixedDirection, Adversarial, ZerothOrderImplicit };

/// Bias b(t) with ||b(t)||_* <= B(t) = B0 * t^-q for the explicit kinds.
/// ZerothOrderImplicit has no closed form; its declared envelope is c_zo * mu(t).
struct BiasModel {
  BiasKind kind = BiasKind::None;
  Vec direction;  // FixedDirection; normalized to unit dual norm when applied
  double B0 = 0.0;
  double q = 1.0;
  double c_zo = 0.0;
};

enum class NoiseKind { GaussianIso, BoundedUniform, StudentT };

/// Zero-mean noise zeta(t), independent across coordinates.
///   GaussianIso: N(0, sigma^2); BoundedUniform: U[-radius, radius];
///   StudentT: scale * t_dof.
/// nu bounds E||g~||_*^2; nu1 is the declared sub-Gaussian parameter.
struct NoiseModel {
  NoiseKind kind = NoiseKind::GaussianIso;
  double sigma = 0.0;
  double radius = 0.0;
  double dof = 3.0;
  double scale = 1.0;
  double nu = 0.0;
  std::optional<double> nu1;
};

/// mu(t) = mu0 * t^-r.
struct SmoothingSchedule {
  double mu0 = 1.0;
  double r = 1.0;

  double mu(std::uint64_t t) const;
};

struct OracleConfig {
  BiasModel bias;
  NoiseModel noise;
  SmoothingSchedule smoothing;

  bool zeroth_order() const { return bias.kind == BiasKind::ZerothOrderImplicit; }
};

std::string to_string(BiasKind kind);
std::string to_string(NoiseKind kind);

/// B(t); for ZerothOrderImplicit the declared envelope c_zo * mu(t).
double bias_bound(const OracleConfig& cfg, std::uint64_t t);

/// Explicit bias vector at (x, t). Zero for None; throws ConfigError for the
/// zeroth-order kind.
Vec bias_vector(const OracleConfig& cfg, const Problem& p, const NormPair& norms, const Vec& x,
                std::uint64_t t);

/// One noise vector.
Vec draw_noise(const NoiseModel& noise, int dim, Stream& rng);

/// g~ = subgrad(x) + b(t) + zeta. Throws ConfigError for ZerothOrderImplicit.
Vec sample(const OracleConfig& cfg, const Problem& p, const NormPair& norms, const Vec& x,
           std::uint64_t t, Stream& rng);

/// Gaussian-smoothing estimate ((f(x + mu u) - f(x)) / mu) u, u ~ N(0, I).
Vec zo_sample(const Problem& p, const Vec& x, double mu, Stream& rng);

/// Routes to zo_sample with mu(t) for the zeroth-order kind, to sample otherwise.
Vec draw_gradient(const OracleConfig& cfg, const Problem& p, const NormPair& norms, const Vec& x,
                  std::uint64_t t, Stream& rng);

struct MomentEstimate {
  std::uint64_t n = 0;
  double mean_dev = 0.0;  // ||mean(g~) - subgrad - b(t)||_*
  double m2 = 0.0;        // mean ||g~||_*^2
  double m2_se = 0.0;
  double m4 = 0.0;        // mean ||zeta||_*^4
  double m4_se = 0.0;
  double nu2_hat = 0.0;   // sqrt(m4 + 3 SE)
  Vec zeta_mean;          // componentwise mean of zeta
  Vec zeta_se;            // componentwise standard error
};

/// Monte Carlo moments at a fixed (x, t). Draw i uses the substream
/// (seed, i, t), so the estimate is reproducible. For the zeroth-order kind the
/// bias is unknown: mean_dev is measured against subgrad alone and zeta is
/// centered at the sample mean. Requires n >= 10^4.
MomentEstimate estimate_moments(const OracleConfig& cfg, const Problem& p, const NormPair& norms,
                                const Vec& x, std::uint64_t t, std::uint64_t n, std::uint64_t seed);

struct TailCheckRow {
  int direction = 0;
  double s = 0.0;
  std::uint64_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double bound = 0.0;  // exp(-s^2 / (2 nu1^2))
  bool ok = true;
};

struct TailCheck {
  bool passed = true;
  std::vector<TailCheckRow> rows;
};

/// Empirical P(<u, zeta> >= s) against exp(-s^2 / (2 nu1^2)) for s in
/// {1, 2, 3} * nu1 and `directions` random primal-unit u. A row fails when the
/// one-sided exact lower confidence bound (level gamma) exceeds the bound.
TailCheck subgaussian_tail_check(const NoiseModel& noise, int dim, const NormPair& norms,
                                 double nu1, std::uint64_t n, std::uint64_t seed,
                                 int directions = 10, double gamma = 0.99);

/// Outcome of the moment contracts for one oracle at one (x, t).
struct OracleContracts {
  MomentEstimate moments;
  bool zero_mean = true;      // every |zeta_mean_i| <= 4 SE
  bool second_moment = true;  // m2 <= nu^2 + 4 SE
  bool bias_envelope = true;  // zeroth-order only: mean_dev within c_zo mu(t) + 4 SE
  std::optional<TailCheck> subgaussian;  // present when nu1 is declared
  bool passed() const;
};

OracleContracts check_oracle(const OracleConfig& cfg, const Problem& p, const NormPair& norms,
                             const Vec& x, std::uint64_t t, std::uint64_t n, std::uint64_t seed);

}  // namespace smd
