#include "smdlab/config.hpp"

#include <openssl/sha.h>

#include <fstream>
#include <set>
#include <sstream>

#include "smdlab/errors.hpp"

namespace smd {

using nlohmann::json;

namespace {

const json& empty_object() {
  static const json empty = json::object();
  return empty;
}

/// Reads one JSON object, remembering which keys were consumed so that
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& j, std::string path, std::vector<std::string>& unknown)
      : j_(j), path_(std::move(path)), unknown_(unknown) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }
  Section(const Section&) = delete;

  ~Section() {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) unknown_.push_back(path_ + "." + key);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(key);
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(path_ + "." + key + ": required");
    return convert<T>(key);
  }

  template <typename T>
  std::optional<T> optional(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return convert<T>(key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  /// Nested object, or an empty one when absent.
  const json& child(const std::string& key) { return has(key) ? j_.at(key) : empty_object(); }

  std::string path(const std::string& key) const { return path_ + "." + key; }

 private:
  template <typename T>
  T convert(const std::string& key) {
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  const json& j_;
  std::string path_;
  std::vector<std::string>& unknown_;
  std::set<std::string> seen_;
};

const json& object_or_empty(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return empty_object();
  return j.at(key);
}

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> require_dim(const std::vector<double>& v, int dim, const std::string& what) {
  if (static_cast<int>(v.size()) != dim)
    throw ConfigError(what + ": expected " + std::to_string(dim) + " entries");
  return v;
}

template <typename T>
void one_of(const T& value, std::initializer_list<T> allowed, const std::string& what) {
  for (const auto& a : allowed)
    if (value == a) return;
  throw ConfigError(what + ": unsupported value");
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return from_json(j);
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  ExperimentConfig c;
  std::vector<std::string> unknown;
  // Unknown keys met before a validation error are named alongside it.
  try {
    Section top(j, "config", unknown);
    for (const char* s : {"problem", "geometry", "oracle", "schedule", "run", "bounds", "output"})
      top.has(s);
    if (!j.contains("problem")) throw ConfigError("config.problem: required");

    {
      Section p(j.at("problem"), "problem", unknown);
      auto& P = c.problem;
      P.kind = p.require<std::string>("kind");
      one_of<std::string>(P.kind, {"quadratic", "pwl_max", "l1norm", "linear_simplex"}, p.path("kind"));
      P.dim = p.require<int>("dim");
      if (P.dim < 1) throw ConfigError("problem.dim: must be positive");
      if (P.kind == "quadratic") {
        P.A = p.require<std::vector<std::vector<double>>>("A");
        P.b = p.get<std::vector<double>>("b", std::vector<double>(std::size_t(P.dim), 0.0));
      } else if (P.kind == "pwl_max") {
        P.pieces = p.require<std::vector<std::vector<double>>>("pieces");
        P.offsets = p.get<std::vector<double>>("offsets", std::vector<double>(P.pieces.size(), 0.0));
      } else if (P.kind == "l1norm") {
        P.shift = p.get<std::vector<double>>("shift", std::vector<double>(std::size_t(P.dim), 0.0));
      } else {
        P.cost = p.require<std::vector<double>>("cost");
      }
      if (!p.has("set")) throw ConfigError("problem.set: required");
      Section s(p.raw("set"), "problem.set", unknown);
      auto& S = P.set;
      S.kind = s.require<std::string>("kind");
      one_of<std::string>(S.kind, {"box", "ball", "simplex"}, s.path("kind"));
      if (S.kind == "box") {
        S.lo = s.require<std::vector<double>>("lo");
        S.hi = s.require<std::vector<double>>("hi");
      } else if (S.kind == "ball") {
        S.center = s.get<std::vector<double>>("center", std::vector<double>(std::size_t(P.dim), 0.0));
        S.radius = s.get<double>("radius", 1.0);
      }
    }

    {
      Section g(object_or_empty(j, "geometry"), "geometry", unknown);
      auto& G = c.geometry;
      G.map = g.get<std::string>("map", G.map);
      one_of<std::string>(G.map, {"euclidean", "entropy"}, g.path("map"));
      G.norm = g.get<std::string>("norm", G.map == "entropy" ? "l1" : "l2");
      one_of<std::string>(G.norm, {"l2", "l1"}, g.path("norm"));
      G.entropy_floor = g.get<double>("entropy_floor", G.entropy_floor);
    }

    {
      Section o(object_or_empty(j, "oracle"), "oracle", unknown);
      auto& O = c.oracle;
      {
        Section b(o.child("bias"), "oracle.bias", unknown);
        O.bias = b.get<std::string>("kind", O.bias);
        one_of<std::string>(O.bias, {"none", "fixed", "adversarial", "zeroth_order"}, b.path("kind"));
        if (O.bias == "fixed" || O.bias == "adversarial") {
          O.B0 = b.get<double>("B0", O.B0);
          O.q = b.get<double>("q", O.q);
        }
        if (O.bias == "fixed") O.direction = b.require<std::vector<double>>("direction");
        if (O.bias == "zeroth_order") O.c_zo = b.require<double>("c_zo");
      }
      {
        Section n(o.child("noise"), "oracle.noise", unknown);
        O.noise = n.get<std::string>("kind", O.noise);
        one_of<std::string>(O.noise, {"gaussian", "uniform", "student_t"}, n.path("kind"));
        if (O.noise == "gaussian") O.sigma = n.get<double>("sigma", O.sigma);
        if (O.noise == "uniform") O.radius = n.require<double>("radius");
        if (O.noise == "student_t") {
          O.dof = n.get<double>("dof", O.dof);
          O.scale = n.get<double>("scale", O.scale);
        }
      }
      O.nu = o.require<double>("nu");
      O.nu1 = o.optional<double>("nu1");
      if (O.bias == "zeroth_order") {
        Section m(o.child("smoothing"), "oracle.smoothing", unknown);
        O.mu0 = m.get<double>("mu0", O.mu0);
        O.r = m.get<double>("r", O.r);
      } else {
        if (o.has("smoothing"))
          throw ConfigError("oracle.smoothing: only used by the zeroth_order bias");
      }
    }

    {
      Section s(object_or_empty(j, "schedule"), "schedule", unknown);
      c.schedule.alpha0 = s.get<double>("alpha0", c.schedule.alpha0);
      c.schedule.k = s.get<double>("k", c.schedule.k);
    }

    {
      Section r(object_or_empty(j, "run"), "run", unknown);
      auto& R = c.run;
      R.T = r.get<std::uint64_t>("T", R.T);
      if (R.T < 1) throw ConfigError("run.T: must be >= 1");
      R.n_trials = r.get<std::uint64_t>("n_trials", R.n_trials);
      if (R.n_trials < 1) throw ConfigError("run.n_trials: must be >= 1");
      if (r.has("checkpoints")) {
        const auto& cp = r.raw("checkpoints");
        if (cp.is_string()) {
          if (cp.get<std::string>() != "geometric")
            throw ConfigError("run.checkpoints: expected \"geometric\" or a list");
        } else {
          R.checkpoints = r.get<std::vector<std::uint64_t>>("checkpoints", {});
        }
      }
      R.seed = r.get<std::uint64_t>("seed", R.seed);
      R.audit = r.get<bool>("audit", R.audit);
      R.x1 = r.optional<std::vector<double>>("x1");
      R.rate_lo = r.get<std::uint64_t>("rate_lo", R.rate_lo);
      R.rate_hi = r.get<std::uint64_t>("rate_hi", R.T);
    }

    {
      Section b(object_or_empty(j, "bounds"), "bounds", unknown);
      auto& B = c.bounds;
      B.eps = b.get<std::vector<double>>("eps", B.eps);
      B.eps_scale = b.get<std::string>("eps_scale", B.eps_scale);
      one_of<std::string>(B.eps_scale, {"absolute", "initial_gap"}, b.path("eps_scale"));
      B.p = b.get<std::vector<double>>("p", B.p);
      B.T_max = b.get<std::uint64_t>("T_max", B.T_max);
      B.kappa1 = b.optional<double>("kappa1");
      B.nu2 = b.optional<double>("nu2");
      B.a_ceiling = b.optional<double>("a_ceiling");
      B.moment_samples = b.get<std::uint64_t>("moment_samples", B.moment_samples);
      for (double e : B.eps)
        if (!(e > 0.0)) throw ConfigError("bounds.eps: entries must be positive");
      for (double p : B.p)
        if (!(p > 0.0 && p < 1.0)) throw ConfigError("bounds.p: entries must lie in (0, 1)");
      if (B.T_max < 1 || B.T_max > kMaxHorizon) throw ConfigError("bounds.T_max: must lie in [1, 2^53]");
      if (B.moment_samples < 10000) throw ConfigError("bounds.moment_samples: must be >= 10000");
    }

    {
      Section o(object_or_empty(j, "output"), "output", unknown);
      c.output.directory = o.get<std::string>("directory", c.output.directory);
      c.output.formats = o.get<std::vector<std::string>>("formats", c.output.formats);
      for (const auto& f : c.output.formats) one_of<std::string>(f, {"csv", "json", "jsonl"}, "output.formats");
    }
  } catch (const ConfigError& e) {
    if (unknown.empty()) throw;
    std::string msg = std::string(e.what()) + "; unknown keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }

  if (!unknown.empty()) {
    std::string msg = "config: unknown keys:";
    for (const auto& u : unknown) msg += " " + u;
    throw ConfigError(msg);
  }
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  auto& p = j["problem"];
  p["kind"] = problem.kind;
  p["dim"] = problem.dim;
  if (problem.kind == "quadratic") {
    p["A"] = problem.A;
    p["b"] = problem.b;
  } else if (problem.kind == "pwl_max") {
    p["pieces"] = problem.pieces;
    p["offsets"] = problem.offsets;
  } else if (problem.kind == "l1norm") {
    p["shift"] = problem.shift;
  } else {
    p["cost"] = problem.cost;
  }
  auto& s = p["set"];
  s["kind"] = problem.set.kind;
  if (problem.set.kind == "box") {
    s["lo"] = problem.set.lo;
    s["hi"] = problem.set.hi;
  } else if (problem.set.kind == "ball") {
    s["center"] = problem.set.center;
    s["radius"] = problem.set.radius;
  }

  j["geometry"] = {{"map", geometry.map}, {"norm", geometry.norm}, {"entropy_floor", geometry.entropy_floor}};

  auto& o = j["oracle"];
  auto& b = o["bias"];
  b["kind"] = oracle.bias;
  if (oracle.bias == "fixed" || oracle.bias == "adversarial") {
    b["B0"] = oracle.B0;
    b["q"] = oracle.q;
  }
  if (oracle.bias == "fixed") b["direction"] = oracle.direction;
  if (oracle.bias == "zeroth_order") {
    b["c_zo"] = oracle.c_zo;
    o["smoothing"] = {{"mu0", oracle.mu0}, {"r", oracle.r}};
  }
  auto& n = o["noise"];
  n["kind"] = oracle.noise;
  if (oracle.noise == "gaussian") n["sigma"] = oracle.sigma;
  if (oracle.noise == "uniform") n["radius"] = oracle.radius;
  if (oracle.noise == "student_t") {
    n["dof"] = oracle.dof;
    n["scale"] = oracle.scale;
  }
  o["nu"] = oracle.nu;
  o["nu1"] = oracle.nu1 ? json(*oracle.nu1) : json(nullptr);

  j["schedule"] = {{"alpha0", schedule.alpha0}, {"k", schedule.k}};

  auto& r = j["run"];
  r["T"] = run.T;
  r["n_trials"] = run.n_trials;
  r["checkpoints"] = run.checkpoints.empty() ? json("geometric") : json(run.checkpoints);
  r["seed"] = run.seed;
  r["audit"] = run.audit;
  r["x1"] = run.x1 ? json(*run.x1) : json(nullptr);
  r["rate_lo"] = run.rate_lo;
  r["rate_hi"] = run.rate_hi;

  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  j["bounds"] = {{"eps", bounds.eps},
                 {"eps_scale", bounds.eps_scale},
                 {"p", bounds.p},
                 {"T_max", bounds.T_max},
                 {"kappa1", opt(bounds.kappa1)},
                 {"nu2", opt(bounds.nu2)},
                 {"a_ceiling", opt(bounds.a_ceiling)},
                 {"moment_samples", bounds.moment_samples}};
  j["output"] = {{"directory", output.directory}, {"formats", output.formats}};
  return j;
}

std::string ExperimentConfig::digest() const {
  json j = to_json();
  j["output"].erase("directory");
  const std::string canon = j.dump();
  unsigned char md[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(canon.data()), canon.size(), md);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < 8; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

Experiment ExperimentConfig::build() const {
  const int dim = problem.dim;

  ConstraintSet set;
  if (problem.set.kind == "box") {
    set = ConstraintSet::box(to_vec(require_dim(problem.set.lo, dim, "problem.set.lo")),
                             to_vec(require_dim(problem.set.hi, dim, "problem.set.hi")));
  } else if (problem.set.kind == "ball") {
    set = ConstraintSet::ball(to_vec(require_dim(problem.set.center, dim, "problem.set.center")),
                              problem.set.radius);
  } else {
    set = ConstraintSet::simplex(dim);
  }

  MirrorMap map;
  map.kind = geometry.map == "entropy" ? MapKind::NegativeEntropy : MapKind::EuclideanHalfSq;
  map.entropy_floor = geometry.entropy_floor;
  NormPair norms{geometry.norm == "l1" ? PrimalNorm::L1 : PrimalNorm::L2};
  Geometry geom(map, norms, set);

  ProblemParams params;
  ProblemKind kind = ProblemKind::Quadratic;
  if (problem.kind == "quadratic") {
    if (static_cast<int>(problem.A.size()) != dim) throw ConfigError("problem.A: expected dim rows");
    params.A.resize(dim, dim);
    for (int i = 0; i < dim; ++i) {
      require_dim(problem.A[std::size_t(i)], dim, "problem.A row");
      for (int k = 0; k < dim; ++k) params.A(i, k) = problem.A[std::size_t(i)][std::size_t(k)];
    }
    params.b = to_vec(require_dim(problem.b, dim, "problem.b"));
  } else if (problem.kind == "pwl_max") {
    kind = ProblemKind::PiecewiseLinearMax;
    for (const auto& a : problem.pieces) params.pieces.push_back(to_vec(require_dim(a, dim, "problem.pieces")));
    params.offsets = problem.offsets;
  } else if (problem.kind == "l1norm") {
    kind = ProblemKind::L1Norm;
    params.shift = to_vec(require_dim(problem.shift, dim, "problem.shift"));
  } else {
    kind = ProblemKind::LinearOnSimplex;
    params.cost = to_vec(require_dim(problem.cost, dim, "problem.cost"));
  }

  OracleConfig oc;
  if (oracle.bias == "none") oc.bias.kind = BiasKind::None;
  if (oracle.bias == "fixed") oc.bias.kind = BiasKind::FixedDirection;
  if (oracle.bias == "adversarial") oc.bias.kind = BiasKind::Adversarial;
  if (oracle.bias == "zeroth_order") oc.bias.kind = BiasKind::ZerothOrderImplicit;
  oc.bias.B0 = oracle.B0;
  oc.bias.q = oracle.q;
  if (!oracle.direction.empty()) oc.bias.direction = to_vec(require_dim(oracle.direction, dim, "oracle.bias.direction"));
  oc.bias.c_zo = oracle.c_zo;
  if (oracle.B0 < 0.0 || oracle.c_zo < 0.0) throw ConfigError("oracle.bias: magnitudes must be >= 0");
  if (oracle.q < 0.0) throw ConfigError("oracle.bias.q: must be >= 0");

  if (oracle.noise == "gaussian") oc.noise.kind = NoiseKind::GaussianIso;
  if (oracle.noise == "uniform") oc.noise.kind = NoiseKind::BoundedUniform;
  if (oracle.noise == "student_t") oc.noise.kind = NoiseKind::StudentT;
  oc.noise.sigma = oracle.sigma;
  oc.noise.radius = oracle.radius;
  oc.noise.dof = oracle.dof;
  oc.noise.scale = oracle.scale;
  oc.noise.nu = oracle.nu;
  oc.noise.nu1 = oracle.nu1;
  if (oracle.sigma < 0.0 || oracle.radius < 0.0 || !(oracle.dof > 0.0) || !(oracle.scale >= 0.0))
    throw ConfigError("oracle.noise: invalid parameters");
  if (!(oracle.nu >= 0.0)) throw ConfigError("oracle.nu: must be >= 0");
  if (oracle.nu1 && !(*oracle.nu1 > 0.0)) throw ConfigError("oracle.nu1: must be positive");
  oc.smoothing = {oracle.mu0, oracle.r};
  if (oc.zeroth_order() && (!(oracle.mu0 > 0.0) || oracle.r < 0.0))
    throw ConfigError("oracle.smoothing: mu0 must be positive and r >= 0");

  StepSchedule sched{schedule.alpha0, schedule.k};
  sched.validate();

  Experiment ex{make_problem(kind, dim, params, set, norms), geom, oc, sched, std::nullopt, digest()};
  if (run.x1) {
    const Vec x1 = to_vec(require_dim(*run.x1, dim, "run.x1"));
    if (!geom.feasible(x1)) throw ConfigError("run.x1: start point is infeasible");
    ex.x1 = x1;
  }
  for (auto t : run.checkpoints)
    if (t < 1 || t > run.T) throw ConfigError("run.checkpoints: entries must lie in [1, T]");
  return ex;
}

std::vector<std::string> ExperimentConfig::warnings() const {
  StepSchedule sched{schedule.alpha0, schedule.k};
  auto w = sched.warnings();
  double q = oracle.q;
  bool biased = (oracle.bias == "fixed" || oracle.bias == "adversarial") && oracle.B0 > 0.0;
  if (oracle.bias == "zeroth_order") {
    q = oracle.r;
    biased = oracle.c_zo > 0.0;
  }
  if (biased) {
    const double s = schedule.k + q;
    if (std::abs(s - 1.0) < 1e-12)
      w.push_back("k + q = 1: sum alpha(t) B(t) sits on the divergence boundary");
    else if (s < 1.0)
      w.push_back("k + q < 1: sum alpha(t) B(t) diverges (bias not summable)");
  }
  if (oracle.noise == "gaussian" && oracle.nu1 && geometry.norm == "l2" && *oracle.nu1 < oracle.sigma)
    w.push_back("declared nu1 is below the Gaussian sigma");
  if (oracle.noise == "student_t" && oracle.nu1)
    w.push_back("student_t noise declared sub-Gaussian; the tail diagnostic decides");
  return w;
}

BoundOverrides ExperimentConfig::bound_overrides() const {
  BoundOverrides ov;
  ov.kappa1 = bounds.kappa1;
  ov.nu2 = bounds.nu2;
  ov.a_ceiling = bounds.a_ceiling;
  ov.T_max = bounds.T_max;
  return ov;
}

}  // namespace smd
