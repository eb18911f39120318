#include <doctest.h>

#include <cmath>

#include "smdlab/errors.hpp"
#include "smdlab/oracle.hpp"
#include "support.hpp"

using namespace smd;

namespace {

const NormPair kL2{PrimalNorm::L2};
const NormPair kL1{PrimalNorm::L1};

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

Problem quad_box(int n, double b = 0.0) {
  ProblemParams p;
  p.A = Eigen::MatrixXd::Identity(n, n);
  p.b = Vec::Constant(n, b);
  return make_problem(ProblemKind::Quadratic, n, p, ConstraintSet::box(Vec::Constant(n, -1), Vec::Ones(n)), kL2);
}

OracleConfig gaussian(double sigma, double nu = 10.0) {
  OracleConfig c;
  c.noise.kind = NoiseKind::GaussianIso;
  c.noise.sigma = sigma;
  c.noise.nu = nu;
  return c;
}

/// Componentwise sample mean of n oracle draws at (x, t).
Vec mean_of(const OracleConfig& cfg, const Problem& p, const Vec& x, std::uint64_t t, int n) {
  Vec s = Vec::Zero(p.dim());
  for (int i = 0; i < n; ++i) {
    Stream rng(99, std::uint64_t(i), t);
    s += draw_gradient(cfg, p, kL2, x, t, rng);
  }
  return s / n;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("noiseless unbiased oracle returns the subgradient") {
    const auto p = quad_box(3);
    const Vec x = (Vec(3) << 0.1, -0.4, 0.9).finished();
    Stream rng(1, 0, 1);
    CHECK(sample(gaussian(0.0), p, kL2, x, 1, rng) == p.subgrad(x));
  }

  TEST_CASE("fixed-direction bias follows its schedule") {
    auto cfg = gaussian(0.0);
    cfg.bias.kind = BiasKind::FixedDirection;
    cfg.bias.direction = Vec::Unit(3, 0);
    cfg.bias.B0 = 1.0;
    cfg.bias.q = 1.0;
    const auto p = quad_box(3);
    const Vec x = Vec::Constant(3, 0.25);
    Stream rng(1, 0, 2);
    const Vec g = sample(cfg, p, kL2, x, 2, rng);
    CHECK((g - p.subgrad(x) - 0.5 * Vec::Unit(3, 0)).norm() == 0.0);
  }

  TEST_CASE("bias vectors stay within the envelope") {
    Stream rng(2, 0, 0, StreamPurpose::Diagnostic);
    const auto p = quad_box(3, 0.5);
    for (auto kind : {BiasKind::FixedDirection, BiasKind::Adversarial})
      for (const auto& norms : {kL2, kL1}) {
        OracleConfig cfg;
        cfg.bias.kind = kind;
        cfg.bias.direction = (Vec(3) << 1, -2, 0.5).finished();
        cfg.bias.B0 = 1.7;
        cfg.bias.q = 0.8;
        for (std::uint64_t t = 1; t < 200; t += 7) {
          const Vec x = smdtest::uniform_in(rng, Vec::Constant(3, -1), Vec::Ones(3));
          const Vec b = bias_vector(cfg, p, norms, x, t);
          CHECK(norms.dual_norm(b) <= bias_bound(cfg, t) * (1 + 1e-15));
        }
      }
  }

  TEST_CASE("bias bound arithmetic") {
    OracleConfig cfg;
    CHECK(bias_bound(cfg, 17) == 0.0);
    cfg.bias.kind = BiasKind::FixedDirection;
    cfg.bias.B0 = 1.0;
    cfg.bias.q = 2.0;
    CHECK(bias_bound(cfg, 4) == 0.0625);
    cfg.bias.kind = BiasKind::ZerothOrderImplicit;
    cfg.bias.c_zo = 2.0;
    cfg.smoothing = {1.0, 1.0};
    CHECK(bias_bound(cfg, 10) == doctest::Approx(0.2).epsilon(1e-15));
    for (std::uint64_t t = 1; t < 100; ++t) CHECK(cfg.smoothing.mu(t + 1) <= cfg.smoothing.mu(t));
  }

  TEST_CASE("gaussian oracle is unbiased over 10^6 draws") {
    const auto p = quad_box(2);
    const Vec x = v2(0.3, -0.6);
    const Vec m = mean_of(gaussian(1.0), p, x, 5, 1000000);
    CHECK((m - p.subgrad(x)).lpNorm<Eigen::Infinity>() < 4e-3);
  }

  TEST_CASE("zeroth-order estimator") {
    const auto p = quad_box(2);
    const Vec x = v2(0.4, -0.7);
    OracleConfig cfg;
    cfg.bias.kind = BiasKind::ZerothOrderImplicit;
    cfg.bias.c_zo = 1.0;
    cfg.smoothing = {0.1, 1.0};
    Stream rng(3, 0, 1);
    CHECK_THROWS_AS(sample(cfg, p, kL2, x, 1, rng), ConfigError);

    // Quadratics have no smoothing bias: the mean is the gradient.
    const int n = 1000000;
    Vec s = Vec::Zero(2), s2 = Vec::Zero(2);
    for (int i = 0; i < n; ++i) {
      Stream r(4, std::uint64_t(i), 1);
      const Vec g = zo_sample(p, x, 0.1, r);
      s += g;
      s2 += g.cwiseProduct(g);
    }
    const Vec mean = s / n;
    const Vec se = ((s2 / n - mean.cwiseProduct(mean)) / n).cwiseSqrt();
    CHECK(std::abs(mean[0] - x[0]) < 4 * se[0]);
    CHECK(std::abs(mean[1] - x[1]) < 4 * se[1]);

    // Constant objective: every draw is exactly zero.
    ProblemParams zero;
    zero.A = Eigen::MatrixXd::Zero(2, 2);
    zero.b = Vec::Zero(2);
    const auto flat = make_problem(ProblemKind::Quadratic, 2, zero, ConstraintSet::box(-Vec::Ones(2), Vec::Ones(2)), kL2);
    for (int i = 0; i < 100; ++i) {
      Stream r(5, std::uint64_t(i), 1);
      CHECK(zo_sample(flat, x, 0.3, r) == Vec::Zero(2));
    }
  }

  TEST_CASE("zeroth-order estimator on the l1 norm at a smooth point") {
    ProblemParams pp;
    pp.shift = Vec::Zero(2);
    const auto p = make_problem(ProblemKind::L1Norm, 2, pp, ConstraintSet::box(-2 * Vec::Ones(2), 2 * Vec::Ones(2)), kL2);
    const Vec x = v2(1, 1);
    const double mu = 1e-3;
    const int n = 1000000;
    Vec s = Vec::Zero(2), s2 = Vec::Zero(2);
    for (int i = 0; i < n; ++i) {
      Stream r(6, std::uint64_t(i), 1);
      const Vec g = zo_sample(p, x, mu, r);
      s += g;
      s2 += g.cwiseProduct(g);
    }
    const Vec mean = s / n;
    const Vec se = ((s2 / n - mean.cwiseProduct(mean)) / n).cwiseSqrt();
    for (int i = 0; i < 2; ++i) CHECK(std::abs(mean[i] - 1.0) < 4 * se[i] + 10 * mu);
  }

  TEST_CASE("moment estimates") {
    const auto p = quad_box(1);
    const Vec x = Vec::Constant(1, 0.2);
    const auto det = estimate_moments(gaussian(0.0), p, kL2, x, 1, 10000, 1);
    CHECK(det.mean_dev == 0.0);
    CHECK(det.m4 == 0.0);
    CHECK(det.nu2_hat == 0.0);
    CHECK(det.m2 == doctest::Approx(0.04));

    const auto g = estimate_moments(gaussian(1.0), p, kL2, x, 1, 400000, 2);
    CHECK(std::abs(g.m4 - 3.0) < 4 * g.m4_se);
    CHECK(g.nu2_hat == doctest::Approx(std::sqrt(3.0)).epsilon(0.02));
    CHECK(g.nu2_hat >= std::sqrt(g.m4));

    CHECK_THROWS_AS(estimate_moments(gaussian(1.0), p, kL2, x, 1, 9999, 2), InputError);
  }

  TEST_CASE("second-moment contract against the declared bound") {
    // nu^2 = (G^2 + B^2 + E|zeta|^2) with margin; E|zeta|^2 = 2 for unit noise in 2-D.
    auto cfg = gaussian(1.0);
    cfg.bias.kind = BiasKind::FixedDirection;
    cfg.bias.direction = v2(1, 1);
    cfg.bias.B0 = 0.5;
    cfg.bias.q = 1.0;
    const auto p = quad_box(2);
    cfg.noise.nu = std::sqrt(p.G() * p.G() + 0.25 + 2.0) * 1.1;
    const auto c = check_oracle(cfg, p, kL2, v2(0.9, -0.9), 1, 100000, 3);
    CHECK(c.second_moment);
    CHECK(c.zero_mean);
    CHECK(c.moments.m2 <= cfg.noise.nu * cfg.noise.nu);
    CHECK(c.passed());
    // An understated nu must be caught.
    cfg.noise.nu = 1.0;
    CHECK_FALSE(check_oracle(cfg, p, kL2, v2(0.9, -0.9), 1, 100000, 3).second_moment);
  }

  TEST_CASE("zero-mean noise for every kind") {
    const auto p = quad_box(3);
    for (auto kind : {NoiseKind::GaussianIso, NoiseKind::BoundedUniform, NoiseKind::StudentT}) {
      OracleConfig cfg;
      cfg.noise.kind = kind;
      cfg.noise.sigma = 1.0;
      cfg.noise.radius = 2.0;
      cfg.noise.dof = 3.0;
      cfg.noise.nu = 100.0;
      const auto c = check_oracle(cfg, p, kL2, Vec::Zero(3), 1, 100000, 7);
      CHECK(c.zero_mean);
    }
  }

  TEST_CASE("sub-Gaussian tail diagnostic") {
    NoiseModel g;
    g.kind = NoiseKind::GaussianIso;
    g.sigma = 0.7;
    CHECK(subgaussian_tail_check(g, 3, kL2, 0.7, 200000, 1).passed);
    CHECK(subgaussian_tail_check(g, 3, kL1, 0.7, 200000, 1).passed);
    NoiseModel u;
    u.kind = NoiseKind::BoundedUniform;
    u.radius = 1.5;
    CHECK(subgaussian_tail_check(u, 2, kL2, 1.5, 200000, 2).passed);
    NoiseModel t;
    t.kind = NoiseKind::StudentT;
    t.dof = 3.0;
    t.scale = 1.0;
    const auto tc = subgaussian_tail_check(t, 2, kL2, 1.0, 200000, 3);
    CHECK_FALSE(tc.passed);
    CHECK(tc.rows.size() == 30);
    // An understated nu1 for Gaussian noise also fails.
    CHECK_FALSE(subgaussian_tail_check(g, 3, kL2, 0.5, 200000, 1).passed);
  }

  TEST_CASE("draws are reproducible from the stream key") {
    const auto p = quad_box(4);
    OracleConfig cfg;
    cfg.noise.kind = NoiseKind::StudentT;
    cfg.noise.dof = 3.0;
    Stream a(11, 5, 9), b(11, 5, 9), c(11, 5, 10);
    const Vec x = Vec::Zero(4);
    const Vec ga = sample(cfg, p, kL2, x, 9, a);
    CHECK(ga == sample(cfg, p, kL2, x, 9, b));
    CHECK(ga != sample(cfg, p, kL2, x, 9, c));
  }
}
