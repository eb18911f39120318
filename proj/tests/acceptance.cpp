// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
// Usage: acceptance [output-dir]   (a temporary directory is used and removed otherwise)
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "smdlab/bounds.hpp"
#include "smdlab/commands.hpp"
#include "smdlab/config.hpp"
#include "smdlab/geometry.hpp"
#include "smdlab/harness.hpp"
#include "smdlab/oracle.hpp"
#include "smdlab/smd.hpp"
#include "smdlab/stats.hpp"
#include "support.hpp"

using namespace smd;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path g_root;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// ---------------------------------------------------------------------------
// Configurations

/// 1/2 |x|^2 - <b, x> on [-1, 1]^2.
json quadratic(double b1, double b2) {
  return {{"kind", "quadratic"},
          {"dim", 2},
          {"A", {{1, 0}, {0, 1}}},
          {"b", {b1, b2}},
          {"set", {{"kind", "box"}, {"lo", {-1, -1}}, {"hi", {1, 1}}}}};
}

/// Euclidean quadratic with its optimum at the corner (1, -1), started at the
/// opposite corner. nu bounds sqrt(E|g~|^2) by Minkowski: G + B0 + sqrt(n) sigma.
json euclid_config(double B0, double sigma, std::uint64_t T, std::uint64_t trials) {
  json oracle = {{"noise", {{"kind", "gaussian"}, {"sigma", sigma}}},
                 {"nu", 2 * std::sqrt(2.0) + B0 + std::sqrt(2.0) * sigma},
                 {"nu1", sigma}};
  if (B0 > 0) oracle["bias"] = {{"kind", "fixed"}, {"B0", B0}, {"q", 0.75}, {"direction", {1, 1}}};
  return {{"problem", quadratic(1, -1)},
          {"geometry", {{"map", "euclidean"}}},
          {"oracle", oracle},
          {"schedule", {{"alpha0", 0.5}, {"k", 0.55}}},
          {"run", {{"T", T}, {"n_trials", trials}, {"seed", 2024}, {"x1", {-1, 1}}}},
          {"bounds", {{"eps", {0.1, 0.3, 1.0}}, {"eps_scale", "initial_gap"}, {"p", {0.9}}}}};
}

/// Linear cost on the 3-simplex under the entropic map, started at the barycenter.
json entropic_config(double B0, double sigma, std::uint64_t T, std::uint64_t trials) {
  json oracle = {{"noise", {{"kind", "gaussian"}, {"sigma", sigma}}},
                 {"nu", 1.0 + B0 + std::sqrt(3.0) * sigma},
                 {"nu1", sigma}};
  if (B0 > 0) oracle["bias"] = {{"kind", "adversarial"}, {"B0", B0}, {"q", 0.75}};
  return {{"problem", {{"kind", "linear_simplex"}, {"dim", 3}, {"cost", {1, 0.5, 0}}, {"set", {{"kind", "simplex"}}}}},
          {"geometry", {{"map", "entropy"}, {"entropy_floor", 1e-2}}},
          {"oracle", oracle},
          {"schedule", {{"alpha0", 1.0}, {"k", 0.55}}},
          {"run", {{"T", T}, {"n_trials", trials}, {"seed", 2025}}},
          {"bounds", {{"eps", {0.1, 0.3, 1.0}}, {"eps_scale", "initial_gap"}, {"p", {0.9}}}}};
}

Experiment build(const json& j) { return ExperimentConfig::from_json(j).build(); }

// ---------------------------------------------------------------------------
// 1. Geometry exactness

Outcome geometry_exactness() {
  const MirrorMap euclid{MapKind::EuclideanHalfSq, 1.0, 1e-12};
  const MirrorMap entropy{MapKind::NegativeEntropy, 1.0, 1e-12};
  Stream rng(101, 0, 0, StreamPurpose::Diagnostic);
  double worst_box = 0, worst_ball = 0, worst_simplex = 0;
  int instances = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = rep < 10 ? 2 : 3;
    const Vec g = smdtest::uniform_in(rng, Vec::Constant(n, -3), Vec::Constant(n, 3));
    const double alpha = 0.1 + rng.uniform();

    const auto box = ConstraintSet::box(Vec::Constant(n, -1), Vec::Constant(n, 1));
    const Vec xb = smdtest::uniform_in(rng, box.lo, box.hi);
    worst_box = std::max(worst_box, (mirror_step(euclid, box, xb, g, alpha) -
                                     smdtest::brute_step(euclid, box, xb, g, alpha)).norm());

    const auto ball = ConstraintSet::ball(Vec::Constant(n, 0.5), 1.0);
    const Vec xl = ball.center + smdtest::uniform_in(rng, Vec::Constant(n, -0.5), Vec::Constant(n, 0.5)) / std::sqrt(n);
    worst_ball = std::max(worst_ball, (mirror_step(euclid, ball, xl, g, alpha) -
                                       smdtest::brute_step(euclid, ball, xl, g, alpha)).norm());

    const auto simplex = ConstraintSet::simplex(n);
    const Vec xs = smdtest::simplex_point(rng, n, 1e-3);
    worst_simplex = std::max(worst_simplex, (mirror_step(entropy, simplex, xs, g, alpha) -
                                             smdtest::brute_step(entropy, simplex, xs, g, alpha))
                                                .lpNorm<Eigen::Infinity>());
    instances += 3;
  }

  double worst_tp = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 2 + rep % 2;
    const Vec x = smdtest::uniform_in(rng, Vec::Constant(n, -1), Vec::Ones(n));
    const Vec y = smdtest::uniform_in(rng, Vec::Constant(n, -1), Vec::Ones(n));
    const Vec z = smdtest::uniform_in(rng, Vec::Constant(n, -1), Vec::Ones(n));
    worst_tp = std::max(worst_tp, three_point_residual(euclid, x, y, z));
    worst_tp = std::max(worst_tp, three_point_residual(entropy, smdtest::simplex_point(rng, n),
                                                       smdtest::simplex_point(rng, n), smdtest::simplex_point(rng, n)));
  }

  int sc_bad = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 2 + rep % 2;
    const Vec x = smdtest::uniform_in(rng, Vec::Constant(n, -1), Vec::Ones(n));
    const Vec y = smdtest::uniform_in(rng, Vec::Constant(n, -1), Vec::Ones(n));
    if (bregman(euclid, x, y) < 0.5 * (x - y).squaredNorm() - 1e-12) ++sc_bad;
    const Vec p = smdtest::simplex_point(rng, n + 1, 1e-9);
    const Vec q = smdtest::simplex_point(rng, n + 1, 1e-9);
    const double l1 = (p - q).lpNorm<1>();
    if (bregman(entropy, p, q) < 0.5 * l1 * l1 - 1e-12) ++sc_bad;
  }

  const double worst_step = std::max({worst_box, worst_ball, worst_simplex});
  return {worst_step <= 1e-6 && worst_tp < 1e-9 && sc_bad == 0,
          fmt::format("{} brute-force instances, max step error {:.2e} (box {:.1e}, ball {:.1e}, simplex {:.1e}); "
                      "max three-point residual {:.2e} over 2000 triples; strong convexity violations {}/2000",
                      instances, worst_step, worst_box, worst_ball, worst_simplex, worst_tp, sc_bad)};
}

// ---------------------------------------------------------------------------
// 2. Per-step audit

Outcome step_audit() {
  const auto gauss = [](double s) { return json{{"kind", "gaussian"}, {"sigma", s}}; };
  const std::vector<std::pair<std::string, json>> settings = {
      {"gaussian", {{"noise", gauss(0.5)}, {"nu", 10.0}}},
      {"gaussian+fixed bias",
       {{"noise", gauss(0.5)}, {"nu", 10.0}, {"bias", {{"kind", "fixed"}, {"B0", 0.5}, {"q", 0.75}, {"direction", {1, -1}}}}}},
      {"uniform+adversarial bias",
       {{"noise", {{"kind", "uniform"}, {"radius", 1.0}}}, {"nu", 10.0}, {"bias", {{"kind", "adversarial"}, {"B0", 0.3}, {"q", 0.6}}}}}};

  std::uint64_t steps = 0, ber_bad = 0;
  double worst = -INFINITY;
  int configs = 0;
  for (const auto& [name, oracle] : settings) {
    for (const bool entropic : {false, true}) {
      json j = entropic ? entropic_config(0, 0.1, 1, 1) : euclid_config(0, 0.1, 1, 1);
      j["oracle"] = oracle;
      if (entropic) {
        j["geometry"]["entropy_floor"] = 1e-6;
        if (j["oracle"].contains("bias") && j["oracle"]["bias"]["kind"] == "fixed")
          j["oracle"]["bias"]["direction"] = {1, -1, 0};
      }
      j["run"].erase("x1");
      const auto ex = build(j);
      const auto tr = run(ex, {.T = 2000, .seed = 31 + std::uint64_t(configs), .audit = true});
      for (const auto& row : tr.rows) {
        if (!row.audit) continue;
        ++steps;
        const double rel = row.audit->ber_residual / row.audit->ber_scale;
        worst = std::max(worst, rel);
        if (rel > 1e-9) ++ber_bad;
      }
      ++configs;
    }
  }
  return {steps >= 10000 && ber_bad == 0 && configs == 6,
          fmt::format("{} audited steps over {} configurations, {} above 1e-9 relative, max relative residual {:.2e}",
                      steps, configs, ber_bad, worst)};
}

// ---------------------------------------------------------------------------
// 3. Almost-sure convergence

Outcome convergence() {
  // Interior optimum (0.3, -0.2); bias and steps both decay like t^-0.75.
  json j = {{"problem", quadratic(0.3, -0.2)},
            {"geometry", {{"map", "euclidean"}}},
            {"oracle",
             {{"noise", {{"kind", "gaussian"}, {"sigma", 1.0}}},
              {"nu", 10.0},
              {"bias", {{"kind", "fixed"}, {"B0", 0.5}, {"q", 0.75}, {"direction", {1, 1}}}}}},
            {"schedule", {{"alpha0", 0.5}, {"k", 0.75}}},
            {"run", {{"T", 10000}, {"x1", {1, 1}}}}};
  const auto ex = build(j);
  const auto ts = run_trials(ex, 100, 10000, {1, 100, 10000}, 303);
  const auto g1 = ts.gaps_at(1), g100 = ts.gaps_at(100), g10k = ts.gaps_at(10000);
  const double m100 = median(g100), m10k = median(g10k);
  int below_start = 0;
  for (std::size_t i = 0; i < g1.size(); ++i) below_start += g10k[i] < g1[i];
  return {m10k < m100 / 5 && below_start == int(g1.size()),
          fmt::format("median gap_z(1e2) {:.4e}, median gap_z(1e4) {:.4e}, ratio {:.2f} (need > 5); "
                      "{}/{} trajectories end below gap_z(1)",
                      m100, m10k, m100 / m10k, below_start, g1.size())};
}

// ---------------------------------------------------------------------------
// 4. Rate

Outcome rate() {
  bool ok = true;
  std::string detail;
  for (double k : {0.6, 0.75}) {
    json j = {{"problem", quadratic(2, -2)},
              {"geometry", {{"map", "euclidean"}}},
              {"oracle",
               {{"noise", {{"kind", "gaussian"}, {"sigma", 1.0}}},
                {"nu", 10.0},
                {"bias", {{"kind", "fixed"}, {"B0", 0.5}, {"q", 0.75}, {"direction", {1, 1}}}}}},
              {"schedule", {{"alpha0", 0.5}, {"k", k}}},
              {"run", {{"T", 10000}}}};
    const auto ex = build(j);
    const auto ts = run_trials(ex, 100, 10000, geometric_checkpoints(10000, std::vector<std::uint64_t>{100}), 404);
    const auto fit = fit_rate(ts, 100, 10000);
    const double target = -(1.0 - k);
    const bool in = !fit.flagged && std::abs(fit.slope - target) <= 0.15;
    ok = ok && in;
    detail += fmt::format("{}k={}: slope {:.3f} vs {:.2f} over {} points", detail.empty() ? "" : "; ", k, fit.slope,
                          target, fit.points);
  }
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 5-7. Monte Carlo bound comparisons on the four acceptance configurations

struct McRun {
  std::string name;
  json summary;
};

std::vector<McRun> g_mc;

void run_acceptance_configs() {
  const std::vector<std::pair<std::string, json>> cfgs = {
      {"euclidean B=0", euclid_config(0.0, 0.1, 32000, 500)},
      {"euclidean B0=0.2", euclid_config(0.2, 0.1, 32000, 500)},
      {"entropic B=0", entropic_config(0.0, 0.1, 20000, 500)},
      {"entropic B0=0.1", entropic_config(0.1, 0.1, 20000, 500)}};
  for (const auto& [name, j] : cfgs) {
    auto slug = name;
    std::replace_if(slug.begin(), slug.end(), [](char c) { return !std::isalnum((unsigned char)c); }, '_');
    CommandOptions opt;
    opt.out_dir = (g_root / ("mc_" + slug)).string();
    const auto res = cmd_montecarlo(ExperimentConfig::from_json(j), opt);
    g_mc.push_back({name, res.report});
  }
}

/// Domination of the empirical tails by one bound at every applicable checkpoint.
Outcome domination(const char* which) {
  std::uint64_t compared = 0, nontrivial = 0, violations = 0;
  std::string detail;
  bool ok = true;
  for (const auto& mc : g_mc) {
    std::uint64_t c = 0, nt = 0, v = 0;
    if (std::string(which) == "theorem5" && !mc.summary["theorem5"]["allowed"].get<bool>()) {
      ok = false;
      detail += fmt::format("{}: refused; ", mc.name);
      continue;
    }
    for (const auto& row : mc.summary["tails"]) {
      const auto& b = row[which];
      if (!b.is_object() || !b["applicable"].get<bool>()) continue;
      ++c;
      if (b["clipped"].get<double>() < 1.0) ++nt;
      if (b["verdict"] != "consistent") ++v;
    }
    compared += c;
    nontrivial += nt;
    violations += v;
    detail += fmt::format("{}: {} checked, {} below 1, {} violations; ", mc.name, c, nt, v);
  }
  ok = ok && violations == 0 && compared > 0;
  return {ok, fmt::format("{}total {} comparisons ({} non-trivial), {} violations", detail, compared, nontrivial,
                          violations)};
}

Outcome theorem4_domination() { return domination("theorem4"); }

Outcome theorem5_domination() {
  auto out = domination("theorem5");
  // Improvement: theorem5 below theorem4 at the largest checkpoint for some
  // applicable tolerance on some configuration.
  int improved = 0;
  std::string where;
  for (const auto& mc : g_mc) {
    const auto T = mc.summary["T"].get<std::uint64_t>();
    for (const auto& row : mc.summary["tails"]) {
      if (row["t"].get<std::uint64_t>() != T || !row["theorem5"].is_object()) continue;
      const auto &b4 = row["theorem4"], &b5 = row["theorem5"];
      if (!b4["applicable"].get<bool>() || !b4["raw"].is_number() || !b5["raw"].is_number()) continue;
      if (b5["raw"].get<double>() < b4["raw"].get<double>()) {
        ++improved;
        if (where.empty())
          where = fmt::format("{} at eps={}*gap0: theorem5 {:.3e} < theorem4 {:.3e}", mc.name,
                              row["eps_factor"].get<double>(), b5["raw"].get<double>(), b4["raw"].get<double>());
      }
    }
  }
  out.pass = out.pass && improved > 0;
  out.detail += fmt::format("; improvement at T on {} (config, eps) pairs{}{}", improved, where.empty() ? "" : ", e.g. ",
                            where);
  return out;
}

Outcome threshold_validity() {
  // Re-substitution: each resolved threshold satisfies its inequality, its predecessor does not.
  int grids = 0, checked = 0, bad = 0;
  for (double k : {0.6, 0.75, 1.0})
    for (double B0 : {0.0, 0.3})
      for (double eps : {0.5, 2.0}) {
        if (grids == 10) break;
        BoundParams p;
        p.nu = p.G = p.D = p.R_sup = 1.0;
        p.sched = {0.8, k};
        p.bias = {B0, 0.8};
        p.T_max = 1 << 24;
        p.nu1 = 0.5;
        p.nu2 = 1.0;
        const BoundEvaluator ev(p);
        for (double pr : {0.9, 0.99})
          for (auto which : {Corollary::Variance, Corollary::SubGaussian}) {
            const auto th = which == Corollary::Variance ? ev.corollary2(eps, pr) : ev.corollary3(eps, pr);
            const std::uint64_t ts[3] = {th.t0, th.t1, th.t2};
            for (int i = 0; i < 3; ++i) {
              if (!th.resolved[std::size_t(i)]) continue;
              ++checked;
              if (ev.deficit(which, i, ts[i], eps, pr) < 0.0) ++bad;
              if (ts[i] > 1 && ev.deficit(which, i, ts[i] - 1, eps, pr) >= 0.0) ++bad;
            }
          }
        ++grids;
      }

  // Empirical check at t_star on the Monte Carlo configurations.
  int evaluated = 0, consistent = 0;
  std::string rows;
  for (const auto& mc : g_mc)
    for (const auto& row : mc.summary["corollary2"]) {
      if (row["verdict"].is_null()) continue;
      ++evaluated;
      consistent += row["verdict"] == "consistent";
      rows += fmt::format("; {} t*={} eps={:.3g}: freq(gap<eps) {:.3f}, upper {:.3f} vs p {}", mc.name,
                          row["thresholds"]["t_star"].get<std::uint64_t>(), row["eps"].get<double>(),
                          row["frequency_below"].get<double>(), row["frequency_below_upper"].get<double>(),
                          row["p"].get<double>());
    }
  return {grids == 10 && bad == 0 && evaluated > 0 && consistent == evaluated,
          fmt::format("{} grids, {} thresholds re-substituted, {} failures; t_star reachable on {} (config, eps), "
                      "{} consistent{}",
                      grids, checked, bad, evaluated, consistent, rows)};
}

// ---------------------------------------------------------------------------
// 8. K

long double zeta3() {
  const long double N = 100000;
  long double s = 0;
  for (long double k = N; k >= 1; k -= 1) s += 1.0L / (k * k * k);
  return s + 1.0L / (2 * N * N) - 1.0L / (2 * N * N * N) + 1.0L / (4 * N * N * N * N);
}

Outcome k_constant() {
  BoundParams p;
  p.nu = p.G = p.D = p.R_sup = 1.0;
  p.sched = {1.0, 1.0};
  p.bias = {1.0, 2.0};
  const BoundEvaluator ev(p);
  const double oracle = double(std::exp(-2.0L * zeta3()));
  const double K = ev.K().K;
  p.bias = {0.0, 1.0};
  const double K0 = BoundEvaluator(p).K().K;
  const bool ok = std::abs(K - 0.09029) <= 1e-4 && std::abs(K - oracle) <= 1e-6 && K0 == 1.0;
  return {ok, fmt::format("K = {:.7f}, oracle exp(-2 zeta(3)) = {:.7f}, |K - 0.09029| = {:.2e}; K without bias = {}",
                          K, oracle, std::abs(K - 0.09029), K0)};
}

// ---------------------------------------------------------------------------
// 9. Oracle contracts

Outcome oracle_contracts() {
  const std::uint64_t n = 1000000;
  std::string detail;
  bool ok = true;
  const std::vector<std::pair<std::string, json>> declared = {
      {"euclidean gaussian", euclid_config(0.2, 0.5, 10, 1)},
      {"entropic gaussian", entropic_config(0.1, 0.3, 10, 1)},
      {"euclidean uniform", [] {
         auto j = euclid_config(0.0, 0.1, 10, 1);
         j["oracle"]["noise"] = {{"kind", "uniform"}, {"radius", 0.8}};
         j["oracle"]["nu1"] = 0.8;
         return j;
       }()}};
  for (const auto& [name, j] : declared) {
    const auto ex = build(j);
    const auto c = check_oracle(ex.oracle, ex.problem, ex.geometry.norms(), ex.start_point(), 1, n, 909);
    const bool tail = c.subgaussian && c.subgaussian->passed;
    ok = ok && c.zero_mean && c.second_moment && tail;
    detail += fmt::format("{}: zero-mean {}, m2 {:.4f} <= nu^2 {:.4f} {}, tail {}; ", name, c.zero_mean ? "ok" : "FAIL",
                          c.moments.m2, ex.oracle.noise.nu * ex.oracle.noise.nu, c.second_moment ? "ok" : "FAIL",
                          tail ? "ok" : "FAIL");
  }

  // Negative control: Student-t(3) declared sub-Gaussian.
  auto heavy = euclid_config(0.0, 0.1, 200, 50);
  heavy["oracle"]["noise"] = {{"kind", "student_t"}, {"dof", 3.0}, {"scale", 0.1}};
  heavy["oracle"]["nu"] = 10.0;
  heavy["oracle"]["nu1"] = 0.1;
  heavy["bounds"]["moment_samples"] = n;
  const auto hex = build(heavy);
  const auto tc = subgaussian_tail_check(hex.oracle.noise, hex.problem.dim(), hex.geometry.norms(), 0.1, n, 919);
  CommandOptions opt;
  opt.out_dir = (g_root / "student_t").string();
  const auto rep = cmd_montecarlo(ExperimentConfig::from_json(heavy), opt).report;
  bool any5 = false;
  for (const auto& row : rep["tails"]) any5 = any5 || !row["theorem5"].is_null();
  const bool refused = !rep["theorem5"]["allowed"].get<bool>() && !any5;
  ok = ok && !tc.passed && refused;
  detail += fmt::format("student_t(3): tail check {}, theorem5 {}", tc.passed ? "passed (unexpected)" : "fails",
                        refused ? "refused" : "NOT refused");
  return {ok, detail};
}

// ---------------------------------------------------------------------------
// 10. Determinism and merge equivalence

Outcome determinism() {
  const auto cfg = ExperimentConfig::from_json(euclid_config(0.2, 0.5, 2000, 100));
  bool same = true;
  std::vector<std::string> files;
  for (const auto& [cmd, names] :
       std::vector<std::pair<std::function<CommandResult(const ExperimentConfig&, const CommandOptions&)>,
                             std::vector<std::string>>>{{cmd_run, {"trace.csv", "trace.json"}},
                                                        {cmd_montecarlo, {"trials.jsonl", "summary.json"}}}) {
    CommandOptions a, b;
    a.out_dir = (g_root / "det_a").string();
    b.out_dir = (g_root / "det_b").string();
    cmd(cfg, a);
    cmd(cfg, b);
    for (const auto& f : names) {
      const auto x = slurp(fs::path(*a.out_dir) / f), y = slurp(fs::path(*b.out_dir) / f);
      same = same && !x.empty() && x == y;
      files.push_back(f);
    }
  }

  const auto ex = cfg.build();
  const auto cps = geometric_checkpoints(2000);
  const auto whole = run_trials(ex, 200, 2000, cps, 77, 0);
  auto merged = run_trials(ex, 100, 2000, cps, 77, 0);
  merged.merge(run_trials(ex, 100, 2000, cps, 77, 100));
  const bool merge_ok = merged == whole;
  std::string list;
  for (const auto& f : files) list += (list.empty() ? "" : ", ") + f;
  return {same && merge_ok, fmt::format("repeated seeded runs byte-identical: {} ({}); 2x100 merge equals 1x200: {}",
                                        same ? "yes" : "no", list, merge_ok ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  const bool keep = argc > 1;
  g_root = keep ? fs::path(argv[1]) : fs::temp_directory_path() / ("smdlab_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(g_root);

  struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> body;
  };
  bool mc_ready = false;
  auto with_mc = [&](Outcome (*f)()) {
    return [&, f] {
      if (!mc_ready) {
        run_acceptance_configs();
        mc_ready = true;
      }
      return f();
    };
  };
  const std::vector<Criterion> criteria = {
      {1, "geometry exactness", geometry_exactness},
      {2, "per-step inequality audit", step_audit},
      {3, "almost-sure convergence", convergence},
      {4, "convergence rate", rate},
      {5, "second-moment bound domination", with_mc(theorem4_domination)},
      {6, "sub-Gaussian bound domination", with_mc(theorem5_domination)},
      {7, "threshold validity", with_mc(threshold_validity)},
      {8, "K constant", k_constant},
      {9, "oracle contracts", oracle_contracts},
      {10, "determinism and merge equivalence", determinism},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d %-36s %s  [%.1fs] %s\n", c.id, c.title, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  if (!keep) fs::remove_all(g_root);
  return failed == 0 ? 0 : 1;
}
