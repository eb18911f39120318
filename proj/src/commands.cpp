#include "smdlab/commands.hpp"

#include <fmt/format.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "smdlab/errors.hpp"
#include "smdlab/stats.hpp"

namespace smd {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void dump_into(const json& j, int indent, int depth, std::string& out) {
  auto newline = [&](int d) {
    if (indent < 0) return;
    out.push_back('\n');
    out.append(std::size_t(indent * d), ' ');
  };
  switch (j.type()) {
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v))
        out += "null";
      else
        out += fmt::format("{:.17g}", v);
      return;
    }
    case json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out.push_back('{');
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        out += json(k).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(v, indent, depth + 1, out);
      }
      newline(depth);
      out.push_back('}');
      return;
    }
    case json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out.push_back('[');
      bool first = true;
      for (const auto& v : j) {
        if (!first) out.push_back(',');
        first = false;
        newline(depth + 1);
        dump_into(v, indent, depth + 1, out);
      }
      newline(depth);
      out.push_back(']');
      return;
    }
    default:
      out += j.dump();
  }
}

std::string g17(double v) { return std::isfinite(v) ? fmt::format("{:.17g}", v) : "nan"; }

json vec_json(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json header(const ExperimentConfig& cfg, const std::string& digest) {
  return {{"tool", kToolName}, {"version", kToolVersion}, {"digest", digest}, {"seed", cfg.run.seed}};
}

fs::path out_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output.directory);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

bool wants(const ExperimentConfig& cfg, const std::string& fmt) {
  const auto& f = cfg.output.formats;
  return std::find(f.begin(), f.end(), fmt) != f.end();
}

std::string write_report(const fs::path& dir, const std::string& name, const json& report,
                         CommandResult& res) {
  const auto path = (dir / name).string();
  write_atomic(path, dump17(report, 2) + "\n");
  res.files.push_back(path);
  return path;
}

/// Absolute tolerance levels for the configured eps list.
std::vector<double> absolute_eps(const ExperimentConfig& cfg, double initial_gap) {
  std::vector<double> out;
  for (double e : cfg.bounds.eps) {
    const double a = cfg.bounds.eps_scale == "initial_gap" ? e * initial_gap : e;
    if (!(a > 0.0))
      throw ConfigError("bounds.eps: scaled tolerance is not positive (initial gap " + g17(initial_gap) + ")");
    out.push_back(a);
  }
  return out;
}

struct SubGaussianStatus {
  bool declared = false;
  bool tail_passed = false;
  std::optional<MomentEstimate> moments;
  std::optional<TailCheck> tail;
  std::string reason;
  bool allowed() const { return declared && tail_passed; }
};

/// Estimates nu2 at (x(1), t = 1) and runs the tail diagnostic when nu1 is declared.
SubGaussianStatus subgaussian_status(const ExperimentConfig& cfg, const Experiment& ex) {
  SubGaussianStatus s;
  const auto& noise = ex.oracle.noise;
  if (!noise.nu1) {
    s.reason = "nu1 not declared";
    return s;
  }
  s.declared = true;
  const std::uint64_t n = cfg.bounds.moment_samples;
  s.tail = subgaussian_tail_check(noise, ex.problem.dim(), ex.geometry.norms(), *noise.nu1, n, cfg.run.seed);
  s.tail_passed = s.tail->passed;
  if (!s.tail_passed) s.reason = "sub-Gaussian tail diagnostic failed";
  if (!cfg.bounds.nu2)
    s.moments = estimate_moments(ex.oracle, ex.problem, ex.geometry.norms(), ex.start_point(), 1, n,
                                 cfg.run.seed);
  return s;
}

std::optional<double> nu2_of(const SubGaussianStatus& s) {
  if (s.moments) return s.moments->nu2_hat;
  return std::nullopt;
}

json tail_json(const TailCheck& tc) {
  json rows = json::array();
  for (const auto& r : tc.rows)
    rows.push_back({{"direction", r.direction},
                    {"s", r.s},
                    {"hits", r.hits},
                    {"p_hat", r.p_hat},
                    {"ci_low", r.ci_low},
                    {"bound", r.bound},
                    {"ok", r.ok}});
  return {{"passed", tc.passed}, {"rows", rows}};
}

json moments_json(const MomentEstimate& m) {
  return {{"n", m.n},         {"mean_dev", m.mean_dev}, {"m2", m.m2},
          {"m2_se", m.m2_se}, {"m4", m.m4},             {"m4_se", m.m4_se},
          {"nu2_hat", m.nu2_hat}, {"zeta_mean", vec_json(m.zeta_mean)}, {"zeta_se", vec_json(m.zeta_se)}};
}

json thresholds_json(const Thresholds& th) {
  return {{"t0", th.t0},
          {"t1", th.t1},
          {"t2", th.t2},
          {"t_star", th.t_star},
          {"resolved", {th.resolved[0], th.resolved[1], th.resolved[2]}}};
}

json bound_json(const BoundValue& b) {
  return {{"raw", b.raw}, {"clipped", b.clipped}, {"log_raw", b.log_raw}, {"applicable", b.applicable}};
}

json K_json(const KResult& K) {
  return {{"K", K.K}, {"err", K.err}, {"divergent", K.divergent}, {"S_lower", K.S_lower}, {"S_upper", K.S_upper}};
}

json warnings_json(const ExperimentConfig& cfg) { return json(cfg.warnings()); }

}  // namespace

std::string dump17(const json& j, int indent) {
  std::string out;
  dump_into(j, indent, 0, out);
  return out;
}

void write_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp." + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename into " + path + ": " + ec.message());
  }
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const CommandOptions& opt) {
  if (opt.seed) cfg.run.seed = *opt.seed;
  if (opt.out_dir) cfg.output.directory = *opt.out_dir;
  return cfg;
}

CommandResult cmd_run(const ExperimentConfig& cfg_in, const CommandOptions& opt) {
  const auto cfg = apply_overrides(cfg_in, opt);
  const auto ex = cfg.build();
  CommandResult res;

  RunOptions ro;
  ro.T = cfg.run.T;
  ro.seed = cfg.run.seed;
  ro.audit = cfg.run.audit || opt.check;
  const Trace tr = run(ex, ro);

  const int n = ex.problem.dim();
  std::string csv = fmt::format("# {} {} digest {} seed {}\n", kToolName, kToolVersion, ex.digest, ro.seed);
  csv += "t,gap_x,gap_z";
  for (int i = 0; i < n; ++i) csv += fmt::format(",x{}", i + 1);
  for (int i = 0; i < n; ++i) csv += fmt::format(",z{}", i + 1);
  csv += ",ber_residual,ber_scale,opt_residual\n";

  double worst_rel = -std::numeric_limits<double>::infinity();
  double worst_opt = std::numeric_limits<double>::infinity();
  std::uint64_t audited = 0, ber_bad = 0, opt_bad = 0;
  for (const auto& row : tr.rows) {
    csv += fmt::format("{},{},{}", row.t, g17(row.gap_x), g17(row.gap_z));
    for (int i = 0; i < n; ++i) csv += "," + g17(row.x[i]);
    for (int i = 0; i < n; ++i) csv += "," + g17(row.z[i]);
    if (row.audit) {
      const auto& a = *row.audit;
      csv += fmt::format(",{},{},{}\n", g17(a.ber_residual), g17(a.ber_scale), g17(a.opt_residual));
      ++audited;
      const double rel = a.ber_residual / a.ber_scale;
      worst_rel = std::max(worst_rel, rel);
      worst_opt = std::min(worst_opt, a.opt_residual);
      if (rel > 1e-9) ++ber_bad;
      if (a.opt_residual < -1e-8) ++opt_bad;
    } else {
      csv += ",,,\n";
    }
  }

  const auto dir = out_dir(cfg);
  if (wants(cfg, "csv")) {
    const auto path = (dir / "trace.csv").string();
    write_atomic(path, csv);
    res.files.push_back(path);
  }

  json report = header(cfg, ex.digest);
  report["command"] = "run";
  report["T"] = ro.T;
  report["rows"] = tr.rows.size();
  report["x_final"] = vec_json(tr.x_final);
  report["final_gap_x"] = tr.rows.back().gap_x;
  report["final_gap_z"] = tr.rows.back().gap_z;
  report["warnings"] = warnings_json(cfg);
  if (ro.audit) {
    report["audit"] = {{"steps", audited},
                       {"max_relative_ber_residual", worst_rel},
                       {"min_opt_residual", worst_opt},
                       {"ber_violations", ber_bad},
                       {"opt_violations", opt_bad}};
  } else {
    report["audit"] = nullptr;
  }
  if (opt.check) res.check_failed = ber_bad > 0 || opt_bad > 0;
  report["check"] = opt.check ? json(res.check_failed ? "failed" : "passed") : json(nullptr);
  if (wants(cfg, "json")) write_report(dir, "trace.json", report, res);
  res.report = std::move(report);
  return res;
}

CommandResult cmd_montecarlo(const ExperimentConfig& cfg_in, const CommandOptions& opt) {
  const auto cfg = apply_overrides(cfg_in, opt);
  const auto ex = cfg.build();
  CommandResult res;

  const double initial_gap = ex.problem.gap(ex.start_point());
  const auto eps_abs = absolute_eps(cfg, initial_gap);
  const auto sg = subgaussian_status(cfg, ex);
  const auto bp = bound_params_for(ex, cfg.bound_overrides(), nu2_of(sg));
  const BoundEvaluator ev(bp);

  // Variance-based horizons for every (eps, p), added to the grid when reachable.
  struct Horizon {
    double eps;
    double p;
    Thresholds th;
  };
  std::vector<Horizon> horizons;
  std::vector<std::uint64_t> extra;
  for (double e : eps_abs)
    for (double p : cfg.bounds.p) {
      horizons.push_back({e, p, ev.corollary2(e, p)});
      const auto& th = horizons.back().th;
      if (th.all_resolved() && th.t_star <= cfg.run.T) extra.push_back(th.t_star);
    }
  auto checkpoints = cfg.run.checkpoints;
  if (checkpoints.empty()) checkpoints = geometric_checkpoints(cfg.run.T, extra);
  std::sort(checkpoints.begin(), checkpoints.end());
  checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

  const TrialSet ts = run_trials(ex, cfg.run.n_trials, cfg.run.T, checkpoints, cfg.run.seed, 0, default_workers());
  const auto dir = out_dir(cfg);

  if (wants(cfg, "jsonl")) {
    std::string lines;
    for (const auto& rec : ts.trials)
      for (std::size_t c = 0; c < ts.checkpoints.size(); ++c)
        lines += dump17(json{{"digest", ts.digest},
                             {"version", kToolVersion},
                             {"seed", ts.base_seed},
                             {"trial", rec.trial},
                             {"t", ts.checkpoints[c]},
                             {"gap_z", rec.gap_z[c]}}) +
                 "\n";
    const auto path = (dir / "trials.jsonl").string();
    write_atomic(path, lines);
    res.files.push_back(path);
  }

  bool thm5_ok = sg.allowed();
  std::string thm5_reason = sg.reason;
  if (thm5_ok) {
    try {
      bp.validate();
    } catch (const std::exception& e) {
      thm5_ok = false;
      thm5_reason = e.what();
    }
  }

  std::uint64_t violations = 0, compared = 0;
  json tails = json::array();
  for (std::size_t ei = 0; ei < eps_abs.size(); ++ei) {
    const double e = eps_abs[ei];
    const std::uint64_t t0 = ev.t0(e);
    for (auto t : ts.checkpoints) {
      const auto est = tail_probability(ts, t, e);
      json row = {{"t", t},
                  {"eps", e},
                  {"eps_factor", cfg.bounds.eps[ei]},
                  {"successes", est.successes},
                  {"n", est.n},
                  {"p_hat", est.p_hat},
                  {"ci_low", est.ci_low},
                  {"ci_high", est.ci_high}};
      const auto b4 = ev.theorem4(t, e);
      json j4 = bound_json(b4);
      if (b4.applicable) {
        const auto cmp = compare_bound(est, b4.clipped);
        j4["verdict"] = cmp.verdict == Verdict::Consistent ? "consistent" : "violation";
        j4["margin"] = cmp.margin;
        ++compared;
        if (cmp.verdict == Verdict::Violation) ++violations;
      }
      row["theorem4"] = j4;
      if (thm5_ok) {
        const auto b5 = ev.theorem5(t, e);
        json j5 = bound_json(b5);
        if (b5.applicable) {
          const auto cmp = compare_bound(est, b5.clipped);
          j5["verdict"] = cmp.verdict == Verdict::Consistent ? "consistent" : "violation";
          j5["margin"] = cmp.margin;
          ++compared;
          if (cmp.verdict == Verdict::Violation) ++violations;
        }
        row["theorem5"] = j5;
      } else {
        row["theorem5"] = nullptr;
      }
      row["t0"] = t0;
      tails.push_back(std::move(row));
    }
  }

  // Horizon check: at t_star the frequency of gap_z < eps must reach p
  // up to the one-sided exact interval slack.
  json cor = json::array();
  for (const auto& h : horizons) {
    json row = {{"eps", h.eps}, {"p", h.p}, {"thresholds", thresholds_json(h.th)}};
    if (h.th.all_resolved() && h.th.t_star <= cfg.run.T) {
      const auto est = tail_probability(ts, h.th.t_star, h.eps);
      const double freq_below = 1.0 - est.p_hat;
      const double upper_below = 1.0 - clopper_pearson_lower(est.successes, est.n, 0.99);
      const bool ok = upper_below >= h.p;
      row["frequency_below"] = freq_below;
      row["frequency_below_upper"] = upper_below;
      row["verdict"] = ok ? "consistent" : "violation";
      ++compared;
      if (!ok) ++violations;
    } else {
      row["verdict"] = nullptr;
    }
    cor.push_back(std::move(row));
  }

  json rate = nullptr;
  try {
    const auto fit = fit_rate(ts, cfg.run.rate_lo, std::min(cfg.run.rate_hi, cfg.run.T));
    rate = {{"slope", fit.slope},
            {"stderr", fit.stderr},
            {"points", fit.points},
            {"flagged", fit.flagged},
            {"expected", -(1.0 - cfg.schedule.k)}};
  } catch (const InputError& e) {
    rate = {{"error", e.what()}};
  }

  json report = header(cfg, ex.digest);
  report["command"] = "montecarlo";
  report["T"] = cfg.run.T;
  report["n_trials"] = ts.n_trials();
  report["checkpoints"] = ts.checkpoints;
  report["initial_gap"] = initial_gap;
  report["K"] = K_json(ev.K());
  report["kappa1"] = bp.kappa1;
  report["nu2"] = bp.nu2 ? json(*bp.nu2) : json(nullptr);
  report["theorem5"] = {{"allowed", thm5_ok}, {"reason", thm5_ok ? json(nullptr) : json(thm5_reason)}};
  if (sg.tail) report["subgaussian_check"] = tail_json(*sg.tail);
  report["tails"] = std::move(tails);
  report["corollary2"] = std::move(cor);
  report["rate_fit"] = std::move(rate);
  report["comparisons"] = compared;
  report["violations"] = violations;
  report["warnings"] = warnings_json(cfg);
  if (opt.check) res.check_failed = violations > 0;
  write_report(dir, "summary.json", report, res);
  res.report = std::move(report);
  return res;
}

CommandResult cmd_bounds(const ExperimentConfig& cfg_in, const CommandOptions& opt) {
  const auto cfg = apply_overrides(cfg_in, opt);
  const auto ex = cfg.build();
  CommandResult res;

  const double initial_gap = ex.problem.gap(ex.start_point());
  const auto eps_abs = absolute_eps(cfg, initial_gap);
  const auto sg = subgaussian_status(cfg, ex);
  const auto bp = bound_params_for(ex, cfg.bound_overrides(), nu2_of(sg));
  const BoundEvaluator ev(bp);
  const bool have_subg = bp.nu1 && bp.nu2;

  std::uint64_t failures = 0, checked = 0;
  auto resubstitute = [&](Corollary which, const Thresholds& th, double e, double p) {
    json out = json::array();
    const std::uint64_t ts[3] = {th.t0, th.t1, th.t2};
    for (int i = 0; i < 3; ++i) {
      if (!th.resolved[std::size_t(i)]) {
        out.push_back(nullptr);
        continue;
      }
      const bool holds = ev.deficit(which, i, ts[i], e, p) >= 0.0;
      const bool fails_before = ts[i] == 1 || ev.deficit(which, i, ts[i] - 1, e, p) < 0.0;
      ++checked;
      if (!(holds && fails_before)) ++failures;
      out.push_back(holds && fails_before);
    }
    return out;
  };

  json list = json::array();
  for (std::size_t ei = 0; ei < eps_abs.size(); ++ei)
    for (double p : cfg.bounds.p) {
      const double e = eps_abs[ei];
      const auto c2 = ev.corollary2(e, p);
      json row = {{"eps", e}, {"eps_factor", cfg.bounds.eps[ei]}, {"p", p}, {"corollary2", thresholds_json(c2)}};
      if (opt.check) row["corollary2"]["resubstitution"] = resubstitute(Corollary::Variance, c2, e, p);
      if (have_subg) {
        const auto c3 = ev.corollary3(e, p);
        row["corollary3"] = thresholds_json(c3);
        if (opt.check) row["corollary3"]["resubstitution"] = resubstitute(Corollary::SubGaussian, c3, e, p);
      } else {
        row["corollary3"] = nullptr;
      }
      list.push_back(std::move(row));
    }

  const double e0 = eps_abs.front();
  const auto first = ev.corollary2(e0, cfg.bounds.p.front());
  auto checkpoints = cfg.run.checkpoints;
  if (checkpoints.empty()) checkpoints = geometric_checkpoints(cfg.run.T);
  json curve = json::array();
  for (auto t : checkpoints) {
    const double t4 = ev.theorem4(t, e0).raw;
    double t5 = std::numeric_limits<double>::quiet_NaN();
    if (have_subg) t5 = ev.theorem5(t, e0).raw;
    curve.push_back({t, t4, t5});
  }

  const auto sum = summability(bp.sched, bp.bias, bp.T_max);
  json report = header(cfg, ex.digest);
  report["command"] = "bounds";
  report["K"] = ev.K().K;
  report["err"] = ev.K().err;
  report["K_detail"] = K_json(ev.K());
  report["t0"] = first.t0;
  report["t1"] = first.t1;
  report["t2"] = first.t2;
  report["t_star"] = first.t_star;
  report["resolved"] = first.all_resolved();
  report["eps"] = e0;
  report["constants"] = {{"sigma_R", bp.sigma_R}, {"nu", bp.nu},     {"G", bp.G},
                         {"D", bp.D},             {"R_sup", bp.R_sup}, {"kappa1", bp.kappa1},
                         {"nu1", bp.nu1 ? json(*bp.nu1) : json(nullptr)},
                         {"nu2", bp.nu2 ? json(*bp.nu2) : json(nullptr)},
                         {"a_ceiling", bp.a_ceiling ? json(*bp.a_ceiling) : json(nullptr)},
                         {"T_max", bp.T_max}};
  report["summability"] = {{"partial", sum.partial},
                           {"lower", sum.total ? json(sum.total->lower) : json(nullptr)},
                           {"upper", sum.total ? json(sum.total->upper) : json(nullptr)},
                           {"exponent", sum.exponent},
                           {"boundary", sum.boundary}};
  report["thresholds"] = std::move(list);
  report["bound_curve"] = std::move(curve);
  report["warnings"] = warnings_json(cfg);
  if (opt.check) {
    res.check_failed = failures > 0;
    report["check"] = {{"resubstitutions", checked}, {"failures", failures}};
  }
  write_report(out_dir(cfg), "bounds.json", report, res);
  res.report = std::move(report);
  return res;
}

CommandResult cmd_validate(const ExperimentConfig& cfg_in, const CommandOptions& opt) {
  const auto cfg = apply_overrides(cfg_in, opt);
  const auto ex = cfg.build();
  CommandResult res;

  const Vec x1 = ex.start_point();
  const auto contracts =
      check_oracle(ex.oracle, ex.problem, ex.geometry.norms(), x1, 1, cfg.bounds.moment_samples, cfg.run.seed);

  const auto bp = bound_params_for(ex, cfg.bound_overrides(), contracts.moments.nu2_hat);
  const auto sum = summability(bp.sched, bp.bias, bp.T_max);
  const auto w = cfg.warnings();

  json report = header(cfg, ex.digest);
  report["command"] = "validate";
  report["assumptions"] = {
      {"step_exponent_ok", cfg.schedule.k > 0.5 && cfg.schedule.k <= 1.0},
      {"bias_summable", sum.total.has_value()},
      {"bias_exponent", sum.exponent},
      {"boundary", sum.boundary},
      {"pairing", ex.geometry.map().kind == MapKind::NegativeEntropy ? "entropy/l1" : "euclidean/l2"},
  };
  report["warnings"] = json(w);
  report["moments"] = moments_json(contracts.moments);
  report["contracts"] = {{"zero_mean", contracts.zero_mean},
                         {"second_moment", contracts.second_moment},
                         {"bias_envelope", contracts.bias_envelope},
                         {"subgaussian", contracts.subgaussian ? json(contracts.subgaussian->passed) : json(nullptr)},
                         {"passed", contracts.passed()}};
  if (contracts.subgaussian) report["subgaussian_check"] = tail_json(*contracts.subgaussian);
  report["theorem5_eligible"] = contracts.subgaussian && contracts.subgaussian->passed;
  report["declared"] = {{"nu", ex.oracle.noise.nu},
                        {"nu1", ex.oracle.noise.nu1 ? json(*ex.oracle.noise.nu1) : json(nullptr)},
                        {"G", ex.problem.G()},
                        {"D", ex.geometry.diameter()},
                        {"R_sup", ex.geometry.bregman_radius()}};
  if (opt.check) res.check_failed = !contracts.passed();
  report["check"] = opt.check ? json(res.check_failed ? "failed" : "passed") : json(nullptr);
  write_report(out_dir(cfg), "validate.json", report, res);
  res.report = std::move(report);
  return res;
}

}  // namespace smd
