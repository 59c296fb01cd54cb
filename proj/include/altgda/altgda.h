/* C interface to the altgda library.
 *
 * Objects are opaque handles created by *_create / *_load / altgda_run and
 * released with the matching *_destroy function. Every call returns an
 * altgda_status; on failure altgda_last_error() holds a message for the
 * calling thread. Matrices are row-major, x has n (column) entries and y has
 * m (row) entries.
 */
#ifndef ALTGDA_H
#define ALTGDA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define ALTGDA_API __attribute__((visibility("default")))
#else
#define ALTGDA_API
#endif

typedef enum altgda_status {
  ALTGDA_OK = 0,
  ALTGDA_E_CONTRACT = 1,
  ALTGDA_E_SCALE = 2,
  ALTGDA_E_DEGENERATE = 3,
  ALTGDA_E_CONFIG = 4,
  ALTGDA_E_IO = 5,
  ALTGDA_E_NOT_ALTGDA_STEP = 6,
  ALTGDA_E_PRECONDITION = 7,
  ALTGDA_E_INDEX = 8,
  ALTGDA_E_SAMPLING = 9,
  ALTGDA_E_SOLVER = 10,
  ALTGDA_E_CERTIFICATE = 11,
  ALTGDA_E_RECONSTRUCTION = 12,
  ALTGDA_E_NULL_ARGUMENT = 100,
  ALTGDA_E_INTERNAL = 101
} altgda_status;

typedef enum altgda_algorithm {
  ALTGDA_ALTERNATING = 0,
  ALTGDA_SIMULTANEOUS = 1
} altgda_algorithm;

typedef struct altgda_game altgda_game;
typedef struct altgda_trace altgda_trace;
typedef struct altgda_experiment altgda_experiment;

ALTGDA_API const char* altgda_version(void);
ALTGDA_API const char* altgda_status_string(altgda_status status);
ALTGDA_API const char* altgda_last_error(void);

/* Games */
ALTGDA_API altgda_status altgda_game_create(int m, int n, const double* entries,
                                            altgda_game** out);
ALTGDA_API altgda_status altgda_game_generate(int m, int n, const char* distribution,
                                              uint64_t seed, altgda_game** out);
/* "rps", "matching_pennies" or "nonint3x3". */
ALTGDA_API altgda_status altgda_game_preset(const char* name, altgda_game** out);
ALTGDA_API altgda_status altgda_game_load(const char* path, altgda_game** out);
ALTGDA_API altgda_status altgda_game_save(const altgda_game* game, const char* path);
ALTGDA_API void altgda_game_destroy(altgda_game* game);

ALTGDA_API altgda_status altgda_game_shape(const altgda_game* game, int* m, int* n);
ALTGDA_API altgda_status altgda_game_entries(const altgda_game* game, double* out);
ALTGDA_API altgda_status altgda_game_spectral_norm(const altgda_game* game, double* out);
ALTGDA_API altgda_status altgda_game_duality_gap(const altgda_game* game, const double* x,
                                                 const double* y, double* out);
/* Max-support equilibrium; x_out (n) and y_out (m) may be NULL. */
ALTGDA_API altgda_status altgda_game_equilibrium(const altgda_game* game, double* x_out,
                                                 double* y_out, double* value,
                                                 double* delta, int* interior);

/* Dynamics */
typedef struct altgda_run_options {
  altgda_algorithm algorithm;
  double eta;
  long long horizon;
  long long record_stride; /* 0: log-spaced checkpoints */
} altgda_run_options;

/* x0 / y0 may be NULL for the uniform strategy. */
ALTGDA_API altgda_status altgda_run(const altgda_game* game, const altgda_run_options* options,
                                    const double* x0, const double* y0, altgda_trace** out);
ALTGDA_API void altgda_trace_destroy(altgda_trace* trace);
ALTGDA_API altgda_status altgda_trace_rows(const altgda_trace* trace, long long* rows);
ALTGDA_API altgda_status altgda_trace_row(const altgda_trace* trace, long long index,
                                          long long* t, double* gap_avg);
/* Any output pointer may be NULL. */
ALTGDA_API altgda_status altgda_trace_final(const altgda_trace* trace, double* x, double* y,
                                            double* avg_x, double* avg_y);
ALTGDA_API altgda_status altgda_trace_write_csv(const altgda_trace* trace, const char* path);

/* Performance estimation */
ALTGDA_API altgda_status altgda_pep_export_sdpa(altgda_algorithm algorithm, int T, double eta,
                                                const char* path);
/* solver may be NULL; PEP_SDP_SOLVER takes precedence when set. */
ALTGDA_API altgda_status altgda_pep_value(altgda_algorithm algorithm, int T, double eta,
                                          const char* solver, int timeout_seconds,
                                          double* value);

/* Experiments: the CLI commands run, pep, tune, audit, gen-game, reproduce.
 * config_path and overrides_json may be NULL. */
ALTGDA_API altgda_status altgda_experiment_create(const char* command, const char* config_path,
                                                  const char* overrides_json,
                                                  altgda_experiment** out);
ALTGDA_API void altgda_experiment_destroy(altgda_experiment* experiment);
/* Resolved configuration as JSON; valid until the handle is destroyed. */
ALTGDA_API const char* altgda_experiment_config(const altgda_experiment* experiment);
/* exit_code: 0 success, 1 audit failure. */
ALTGDA_API altgda_status altgda_experiment_execute(altgda_experiment* experiment,
                                                  int* exit_code);
ALTGDA_API const char* altgda_experiment_summary(const altgda_experiment* experiment);

#ifdef __cplusplus
}
#endif

#endif /* ALTGDA_H */
