#include "smdlab/smdlab.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <string>

#include "smdlab/commands.hpp"
#include "smdlab/errors.hpp"

struct smdlab_config {
  smd::ExperimentConfig cfg;
  std::string digest;
  std::vector<std::string> warnings;
};

struct smdlab_trace {
  smd::Trace trace;
};

namespace {

thread_local std::string last_error;

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <typename F>
smdlab_status guarded(F&& f) {
  last_error.clear();
  try {
    return f();
  } catch (const smd::ConfigError& e) {
    last_error = e.what();
    return SMDLAB_CONFIG_ERROR;
  } catch (const smd::NumericalError& e) {
    last_error = e.what();
    return SMDLAB_NUMERICAL_ERROR;
  } catch (const smd::InputError& e) {
    last_error = e.what();
    return SMDLAB_INPUT_ERROR;
  } catch (const smd::IoError& e) {
    last_error = e.what();
    return SMDLAB_IO_ERROR;
  } catch (const std::filesystem::filesystem_error& e) {
    last_error = e.what();
    return SMDLAB_IO_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return SMDLAB_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown error";
    return SMDLAB_INTERNAL_ERROR;
  }
}

smdlab_status wrap_config(smd::ExperimentConfig cfg, smdlab_config** out) {
  // Building validates the cross-field constraints up front.
  (void)cfg.build();
  auto* h = new smdlab_config{std::move(cfg), {}, {}};
  h->digest = h->cfg.digest();
  h->warnings = h->cfg.warnings();
  *out = h;
  return SMDLAB_OK;
}

using Command = smd::CommandResult (*)(const smd::ExperimentConfig&, const smd::CommandOptions&);

smdlab_status dispatch(Command cmd, const smdlab_config* cfg, const smdlab_options* options,
                       char** report) {
  return guarded([&] {
    if (!cfg) throw smd::InputError("null config handle");
    if (report) *report = nullptr;
    smd::CommandOptions opt;
    if (options) {
      if (options->has_seed) opt.seed = options->seed;
      if (options->out_dir) opt.out_dir = options->out_dir;
      opt.check = options->check != 0;
    }
    const auto res = cmd(cfg->cfg, opt);
    if (report) *report = dup(smd::dump17(res.report, 2));
    if (res.check_failed) {
      last_error = "check failed";
      return SMDLAB_CHECK_FAILED;
    }
    return SMDLAB_OK;
  });
}

}  // namespace

extern "C" {

const char* smdlab_version(void) { return smd::kToolVersion; }

const char* smdlab_last_error(void) { return last_error.c_str(); }

smdlab_status smdlab_config_from_file(const char* path, smdlab_config** out) {
  return guarded([&] {
    if (!path || !out) throw smd::InputError("null argument");
    *out = nullptr;
    return wrap_config(smd::ExperimentConfig::load(path), out);
  });
}

smdlab_status smdlab_config_from_string(const char* text, smdlab_config** out) {
  return guarded([&] {
    if (!text || !out) throw smd::InputError("null argument");
    *out = nullptr;
    return wrap_config(smd::ExperimentConfig::parse(text), out);
  });
}

void smdlab_config_free(smdlab_config* cfg) { delete cfg; }

const char* smdlab_config_digest(const smdlab_config* cfg) { return cfg ? cfg->digest.c_str() : ""; }

size_t smdlab_config_warning_count(const smdlab_config* cfg) { return cfg ? cfg->warnings.size() : 0; }

const char* smdlab_config_warning(const smdlab_config* cfg, size_t i) {
  if (!cfg || i >= cfg->warnings.size()) return nullptr;
  return cfg->warnings[i].c_str();
}

char* smdlab_config_canonical(const smdlab_config* cfg) {
  if (!cfg) return nullptr;
  return dup(cfg->cfg.emit());
}

smdlab_status smdlab_cmd_run(const smdlab_config* cfg, const smdlab_options* o, char** r) {
  return dispatch(&smd::cmd_run, cfg, o, r);
}
smdlab_status smdlab_cmd_montecarlo(const smdlab_config* cfg, const smdlab_options* o, char** r) {
  return dispatch(&smd::cmd_montecarlo, cfg, o, r);
}
smdlab_status smdlab_cmd_bounds(const smdlab_config* cfg, const smdlab_options* o, char** r) {
  return dispatch(&smd::cmd_bounds, cfg, o, r);
}
smdlab_status smdlab_cmd_validate(const smdlab_config* cfg, const smdlab_options* o, char** r) {
  return dispatch(&smd::cmd_validate, cfg, o, r);
}

void smdlab_string_free(char* s) { std::free(s); }

smdlab_status smdlab_trace_run(const smdlab_config* cfg, uint64_t seed, smdlab_trace** out) {
  return guarded([&] {
    if (!cfg || !out) throw smd::InputError("null argument");
    *out = nullptr;
    const auto ex = cfg->cfg.build();
    smd::RunOptions ro;
    ro.T = cfg->cfg.run.T;
    ro.seed = seed;
    ro.audit = cfg->cfg.run.audit;
    *out = new smdlab_trace{smd::run(ex, ro)};
    return SMDLAB_OK;
  });
}

size_t smdlab_trace_rows(const smdlab_trace* tr) { return tr ? tr->trace.rows.size() : 0; }

smdlab_status smdlab_trace_row(const smdlab_trace* tr, size_t i, uint64_t* t, double* gap_x,
                               double* gap_z) {
  return guarded([&] {
    if (!tr || i >= tr->trace.rows.size()) throw smd::InputError("trace row out of range");
    const auto& row = tr->trace.rows[i];
    if (t) *t = row.t;
    if (gap_x) *gap_x = row.gap_x;
    if (gap_z) *gap_z = row.gap_z;
    return SMDLAB_OK;
  });
}

void smdlab_trace_free(smdlab_trace* tr) { delete tr; }

}  // extern "C"
