#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "smdlab/config.hpp"

namespace smd {

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool check = false;
};

struct CommandResult {
  bool check_failed = false;
  nlohmann::json report;
  std::vector<std::string> files;  // paths written
};

/// Applies the command-line overrides. The seed is part of the digest, the
/// output directory is not.
ExperimentConfig apply_overrides(ExperimentConfig cfg, const CommandOptions& opt);

/// Single trace with optional per-step audit: trace.csv and trace.json.
CommandResult cmd_run(const ExperimentConfig& cfg, const CommandOptions& opt);
/// Trial set and bound comparisons: trials.jsonl and summary.json.
CommandResult cmd_montecarlo(const ExperimentConfig& cfg, const CommandOptions& opt);
/// K, thresholds and bound curves: bounds.json.
CommandResult cmd_bounds(const ExperimentConfig& cfg, const CommandOptions& opt);
/// Oracle contracts and assumption diagnostics: validate.json.
CommandResult cmd_validate(const ExperimentConfig& cfg, const CommandOptions& opt);

/// JSON text with every floating-point number at 17 significant digits and
/// non-finite numbers as null. indent < 0 gives the compact form.
std::string dump17(const nlohmann::json& j, int indent = -1);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace smd
