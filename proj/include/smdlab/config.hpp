#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smdlab/harness.hpp"
#include "smdlab/smd.hpp"

namespace smd {

inline constexpr const char* kToolName = "smdlab";
inline constexpr const char* kToolVersion = "0.3.0";

struct SetSection {
  std::string kind = "box";  // box | ball | simplex
  std::vector<double> lo, hi, center;
  double radius = 1.0;
};

struct ProblemSection {
  std::string kind;  // quadratic | pwl_max | l1norm | linear_simplex
  int dim = 0;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  std::vector<std::vector<double>> pieces;
  std::vector<double> offsets;
  std::vector<double> shift;
  std::vector<double> cost;
  SetSection set;
};

struct GeometrySection {
  std::string map = "euclidean";  // euclidean | entropy
  std::string norm = "l2";        // l2 | l1
  double entropy_floor = 1e-12;
};

struct OracleSection {
  std::string bias = "none";  // none | fixed | adversarial | zeroth_order
  double B0 = 0.0;
  double q = 1.0;
  std::vector<double> direction;
  double c_zo = 0.0;
  std::string noise = "gaussian";  // gaussian | uniform | student_t
  double sigma = 0.0;
  double radius = 0.0;
  double dof = 3.0;
  double scale = 1.0;
  double nu = 0.0;
  std::optional<double> nu1;
  double mu0 = 1.0;
  double r = 1.0;
};

struct ScheduleSection {
  double alpha0 = 1.0;
  double k = 0.75;
};

struct RunSection {
  std::uint64_t T = 1000;
  std::uint64_t n_trials = 100;
  std::vector<std::uint64_t> checkpoints;  // empty: geometric grid
  std::uint64_t seed = 1;
  bool audit = false;
  std::optional<std::vector<double>> x1;
  std::uint64_t rate_lo = 100;
  std::uint64_t rate_hi = 0;  // 0: T
};

struct BoundsSection {
  std::vector<double> eps{0.1, 0.3, 1.0};
  std::string eps_scale = "initial_gap";  // absolute | initial_gap
  std::vector<double> p{0.9};
  std::uint64_t T_max = 1000000;
  std::optional<double> kappa1;
  std::optional<double> nu2;
  std::optional<double> a_ceiling;
  std::uint64_t moment_samples = 100000;
};

struct OutputSection {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json", "jsonl"};
};

/// Declarative experiment description; one file fully determines a run.
struct ExperimentConfig {
  ProblemSection problem;
  GeometrySection geometry;
  OracleSection oracle;
  ScheduleSection schedule;
  RunSection run;
  BoundsSection bounds;
  OutputSection output;

  /// Parses and validates JSON text. Unknown keys are a ConfigError that lists
  /// every offending path.
  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);

  /// Canonical JSON: every key the configuration uses, defaults filled in.
  nlohmann::json to_json() const;
  std::string emit() const { return to_json().dump(2); }
  /// Stable hash (16 hex chars of SHA-256) of the compact canonical form,
  /// leaving out the output directory.
  std::string digest() const;

  /// Builds the validated experiment. Throws ConfigError on unsupported pairings.
  Experiment build() const;
  /// Assumption diagnostics; violations are allowed but always reported.
  std::vector<std::string> warnings() const;
  BoundOverrides bound_overrides() const;
};

}  // namespace smd
