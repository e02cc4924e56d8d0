#ifndef AIRDBM_H
#define AIRDBM_H

/* C interface to the AirDbM airfoil toolkit.
 *
 * Every function returning airdbm_status leaves a thread-local message behind
 * on failure (airdbm_last_error). Output buffers are caller-owned; strings
 * returned through char** are owned by the caller and released with
 * airdbm_free_string. Handles are opaque and not thread-safe for mutation,
 * but catalog and baseline handles may be read from several threads.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(AIRDBM_BUILDING_LIBRARY)
#define AIRDBM_API __attribute__((visibility("default")))
#else
#define AIRDBM_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum airdbm_status {
    AIRDBM_OK = 0,
    AIRDBM_MALFORMED_FILE = 1,
    AIRDBM_AMBIGUOUS_TOPOLOGY = 2,
    AIRDBM_DIMENSION_MISMATCH = 3,
    AIRDBM_INFEASIBLE_SHAPE = 4,
    AIRDBM_DEGENERATE_NORMALIZATION = 5,
    AIRDBM_MISSING_BASELINE = 6,
    AIRDBM_OUT_OF_RANGE = 7,
    AIRDBM_ILL_CONDITIONED = 8,
    AIRDBM_CONFIG_ERROR = 9,
    AIRDBM_DOMAIN_ERROR = 10,
    AIRDBM_EVALUATOR_UNAVAILABLE = 11,
    AIRDBM_EMPTY_POLAR = 12,
    AIRDBM_INSUFFICIENT_POLAR = 13,
    AIRDBM_PROTOCOL_ERROR = 14,
    AIRDBM_NOT_FOUND = 15,
    AIRDBM_IO_ERROR = 16,
    AIRDBM_NETWORK_ERROR = 17,
    AIRDBM_INVALID_ARGUMENT = 100, /* null pointer, short buffer, bad enum text */
    AIRDBM_INTERNAL = 101
} airdbm_status;

typedef struct airdbm_catalog airdbm_catalog;
typedef struct airdbm_baselines airdbm_baselines;
typedef struct airdbm_env airdbm_env;

AIRDBM_API const char* airdbm_version(void);
AIRDBM_API const char* airdbm_status_name(airdbm_status status);
/* Message of the last failure on this thread; empty after a success. */
AIRDBM_API const char* airdbm_last_error(void);
AIRDBM_API void airdbm_free_string(char* s);

/* Progress lines emitted by long workflows. Pass NULL to silence. */
typedef void (*airdbm_log_fn)(const char* line, void* user);
AIRDBM_API void airdbm_set_log(airdbm_log_fn fn, void* user);

/* Asks a running blocking workflow (serve, rl_env socket) to return.
 * Safe to call from a signal handler. */
AIRDBM_API void airdbm_interrupt(void);

/* ---- catalog ---- */
AIRDBM_API airdbm_status airdbm_catalog_load(const char* path, airdbm_catalog** out);
AIRDBM_API airdbm_status airdbm_catalog_build(const char* source_dir, int resolution, airdbm_catalog** out);
AIRDBM_API size_t airdbm_catalog_size(const airdbm_catalog* catalog);
AIRDBM_API int airdbm_catalog_resolution(const airdbm_catalog* catalog);
/* Copies the resolution+1 values of the named shape into y. */
AIRDBM_API airdbm_status airdbm_catalog_get(const airdbm_catalog* catalog, const char* name, double* y, size_t capacity);
AIRDBM_API void airdbm_catalog_free(airdbm_catalog* catalog);

/* ---- baselines ---- */
AIRDBM_API airdbm_status airdbm_baselines_load(const char* path, airdbm_baselines** out);
AIRDBM_API airdbm_status airdbm_baselines_from_catalog(const airdbm_catalog* catalog, const char* const* names, size_t count,
                                                       airdbm_baselines** out);
/* The twelve published baselines, looked up in the catalog. */
AIRDBM_API airdbm_status airdbm_baselines_published(const airdbm_catalog* catalog, airdbm_baselines** out);
AIRDBM_API size_t airdbm_baselines_count(const airdbm_baselines* baselines);
AIRDBM_API int airdbm_baselines_resolution(const airdbm_baselines* baselines);
AIRDBM_API airdbm_status airdbm_baselines_name(const airdbm_baselines* baselines, size_t index, char** name);
AIRDBM_API airdbm_status airdbm_baselines_save(const airdbm_baselines* baselines, const char* path);
AIRDBM_API void airdbm_baselines_free(airdbm_baselines* baselines);

/* ---- geometry ---- */
/* Blend plus feasibility correction. y receives resolution+1 values;
 * repaired may be NULL. */
AIRDBM_API airdbm_status airdbm_morph(const airdbm_baselines* baselines, const double* weights, size_t count, double* y,
                                      size_t capacity, int* repaired);
AIRDBM_API airdbm_status airdbm_similarity(const double* a, const double* b, size_t length, double* out);
AIRDBM_API airdbm_status airdbm_detect_self_intersection(const double* y, size_t length, int* intersecting);
AIRDBM_API airdbm_status airdbm_repair(const double* y, size_t length, double* out);
/* Parses coordinate-file text and resamples it to the given resolution. */
AIRDBM_API airdbm_status airdbm_resample_text(const char* text, int resolution, double* y, size_t capacity);
/* method: airdbm, hicks-henne, cst, nurbs, parsec. baselines is only used by airdbm. */
AIRDBM_API airdbm_status airdbm_generate(const char* method, const double* dv, size_t count, int resolution,
                                         const airdbm_baselines* baselines, double* y, size_t capacity, int* feasible);
AIRDBM_API airdbm_status airdbm_knob_count(const char* method, size_t* out);
AIRDBM_API uint64_t airdbm_forward_search_eval_count(uint64_t m, uint64_t n);
AIRDBM_API airdbm_status airdbm_hypervolume(const double* f1, const double* f2, size_t count, double* out);

/* ---- geometry-generation environment ---- */
AIRDBM_API airdbm_status airdbm_env_create(const char* method, const double* target, size_t length, size_t episode_length,
                                           uint64_t seed, const airdbm_baselines* baselines, airdbm_env** out);
AIRDBM_API size_t airdbm_env_knob_count(const airdbm_env* env);
AIRDBM_API airdbm_status airdbm_env_reset(airdbm_env* env, double* observation, size_t capacity);
typedef struct airdbm_step_result {
    double reward;
    int terminated;
    double mae;
    int feasible;
    double best_mae_so_far;
} airdbm_step_result;
AIRDBM_API airdbm_status airdbm_env_step(airdbm_env* env, const double* action, size_t count, double* observation,
                                         size_t capacity, airdbm_step_result* result);
/* One line of the agent protocol in, one JSON line out. */
AIRDBM_API airdbm_status airdbm_env_protocol(airdbm_env* env, const char* line, char** response);
AIRDBM_API void airdbm_env_free(airdbm_env* env);

/* ---- workflows ----
 * Runs a named end-to-end workflow configured by a JSON object and returns a
 * JSON report (also on domain failures, where it carries an "error" member).
 * Names: fetch, catalog_build, catalog_info, baselines_export, reconstruct,
 * reconstruct_all, select_baselines, rate_curve, random_baseline_experiment,
 * paramgen, polar, optimize, rl_env, serve, report. */
AIRDBM_API airdbm_status airdbm_run_workflow(const char* name, const char* request_json, char** response_json);

#ifdef __cplusplus
}
#endif

#endif
