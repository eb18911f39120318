// Command-line front end; talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "smdlab/smdlab.h"

namespace {

int exit_code(smdlab_status s) {
  switch (s) {
    case SMDLAB_OK:
      return 0;
    case SMDLAB_NUMERICAL_ERROR:
      return 2;
    case SMDLAB_CHECK_FAILED:
      return 3;
    default:
      return 1;
  }
}

using Command = smdlab_status (*)(const smdlab_config*, const smdlab_options*, char**);

int execute(Command cmd, const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out, bool check, bool quiet) {
  smdlab_config* cfg = nullptr;
  smdlab_status st = smdlab_config_from_file(config_path.c_str(), &cfg);
  if (st != SMDLAB_OK) {
    std::fprintf(stderr, "smdlab: %s\n", smdlab_last_error());
    return exit_code(st);
  }
  for (size_t i = 0; i < smdlab_config_warning_count(cfg); ++i)
    std::fprintf(stderr, "smdlab: warning: %s\n", smdlab_config_warning(cfg, i));

  smdlab_options opt{};
  opt.has_seed = seed.has_value();
  opt.seed = seed.value_or(0);
  opt.out_dir = out.empty() ? nullptr : out.c_str();
  opt.check = check;

  char* report = nullptr;
  st = cmd(cfg, &opt, &report);
  if (report && !quiet) std::printf("%s\n", report);
  smdlab_string_free(report);
  if (st == SMDLAB_CHECK_FAILED)
    std::fprintf(stderr, "smdlab: check failed\n");
  else if (st != SMDLAB_OK)
    std::fprintf(stderr, "smdlab: %s\n", smdlab_last_error());
  smdlab_config_free(cfg);
  return exit_code(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic mirror descent experiments with biased subgradient oracles"};
  app.set_version_flag("--version", std::string(smdlab_version()));
  app.require_subcommand(1);

  struct Args {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    bool check = false;
    bool quiet = false;
  };
  Args args;

  const std::pair<const char*, const char*> specs[] = {
      {"run", "single trace with per-step audit (trace.csv, trace.json)"},
      {"montecarlo", "trial set and tail/bound comparisons (trials.jsonl, summary.json)"},
      {"bounds", "K, iteration thresholds and bound curves (bounds.json)"},
      {"validate", "oracle moment contracts and assumption report (validate.json)"},
  };
  for (const auto& [name, help] : specs) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", args.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", args.seed, "override run.seed");
    sub->add_option("--out", args.out, "override output.directory");
    sub->add_flag("--check", args.check, "exit 3 when the command's acceptance check fails");
    sub->add_flag("-q,--quiet", args.quiet, "do not print the report");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  Command cmd = name == "run"          ? smdlab_cmd_run
                : name == "montecarlo" ? smdlab_cmd_montecarlo
                : name == "bounds"     ? smdlab_cmd_bounds
                                       : smdlab_cmd_validate;
  return execute(cmd, args.config, args.seed, args.out, args.check, args.quiet);
}
