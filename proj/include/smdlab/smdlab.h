#ifndef SMDLAB_H
#define SMDLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SMDLAB_API __declspec(dllexport)
#else
#define SMDLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum smdlab_status {
  SMDLAB_OK = 0,
  SMDLAB_CONFIG_ERROR = 1,
  SMDLAB_NUMERICAL_ERROR = 2,
  SMDLAB_CHECK_FAILED = 3,
  SMDLAB_INPUT_ERROR = 4,
  SMDLAB_IO_ERROR = 5,
  SMDLAB_INTERNAL_ERROR = 6
} smdlab_status;

typedef struct smdlab_config smdlab_config;
typedef struct smdlab_trace smdlab_trace;

typedef struct smdlab_options {
  uint64_t seed;
  int has_seed;        /* nonzero: seed overrides run.seed */
  const char* out_dir; /* NULL: output.directory from the config */
  int check;           /* nonzero: evaluate the command's acceptance check */
} smdlab_options;

SMDLAB_API const char* smdlab_version(void);

/* Message for the last failed call on this thread; empty when none. */
SMDLAB_API const char* smdlab_last_error(void);

SMDLAB_API smdlab_status smdlab_config_from_file(const char* path, smdlab_config** out);
SMDLAB_API smdlab_status smdlab_config_from_string(const char* text, smdlab_config** out);
SMDLAB_API void smdlab_config_free(smdlab_config* cfg);

/* Owned by the handle. */
SMDLAB_API const char* smdlab_config_digest(const smdlab_config* cfg);
SMDLAB_API size_t smdlab_config_warning_count(const smdlab_config* cfg);
SMDLAB_API const char* smdlab_config_warning(const smdlab_config* cfg, size_t i);

/* Canonical JSON form; release with smdlab_string_free. */
SMDLAB_API char* smdlab_config_canonical(const smdlab_config* cfg);

/* Subcommands. When report is non-NULL it receives the JSON report, to be
   released with smdlab_string_free. SMDLAB_CHECK_FAILED is returned only
   when options->check is set. */
SMDLAB_API smdlab_status smdlab_cmd_run(const smdlab_config* cfg, const smdlab_options* options,
                                        char** report);
SMDLAB_API smdlab_status smdlab_cmd_montecarlo(const smdlab_config* cfg,
                                               const smdlab_options* options, char** report);
SMDLAB_API smdlab_status smdlab_cmd_bounds(const smdlab_config* cfg, const smdlab_options* options,
                                           char** report);
SMDLAB_API smdlab_status smdlab_cmd_validate(const smdlab_config* cfg,
                                             const smdlab_options* options, char** report);

SMDLAB_API void smdlab_string_free(char* s);

/* In-memory trace of one seeded run, without touching the filesystem. */
SMDLAB_API smdlab_status smdlab_trace_run(const smdlab_config* cfg, uint64_t seed,
                                          smdlab_trace** out);
SMDLAB_API size_t smdlab_trace_rows(const smdlab_trace* tr);
SMDLAB_API smdlab_status smdlab_trace_row(const smdlab_trace* tr, size_t i, uint64_t* t,
                                          double* gap_x, double* gap_z);
SMDLAB_API void smdlab_trace_free(smdlab_trace* tr);

#ifdef __cplusplus
}
#endif

#endif
