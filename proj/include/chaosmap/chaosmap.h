#ifndef CHAOSMAP_H
#define CHAOSMAP_H

/* C interface to the chaosmap library.
 *
 * Requests and results are JSON text. Strings returned through `char** out`
 * parameters are owned by the caller and released with cm_string_free. On a
 * non-CM_OK status no output is written and cm_last_error() describes the
 * failure (per thread, valid until the next call on that thread).
 *
 * Request fields common to all runs:
 *   system_id      catalog id
 *   system_config  optional factory configuration
 *   set            optional {name: value} overrides; states as "ic.<state>"
 */

#include <stddef.h>

#if defined(_WIN32)
#define CM_API __declspec(dllexport)
#else
#define CM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cm_status {
    CM_OK = 0,
    CM_INVALID_ARGUMENT = 1,
    CM_NOT_FOUND = 2,
    CM_NUMERICAL = 3,
    CM_IO = 4,
    CM_CANCELLED = 5,
    CM_UNAVAILABLE = 6,
    CM_INTERNAL = 7
} cm_status;

typedef struct cm_system cm_system;
typedef struct cm_cancel cm_cancel;
typedef struct cm_service cm_service;

typedef void (*cm_progress_fn)(size_t completed, size_t total, void* user);

CM_API const char* cm_version(void);
CM_API const char* cm_last_error(void);
CM_API void cm_string_free(char* s);

/* Catalog document; hidden reference systems only when include_hidden != 0. */
CM_API cm_status cm_catalog_json(int include_hidden, char** out_json);

/* System handles for direct model evaluation. */
CM_API cm_status cm_system_create(const char* id, const char* config_json, cm_system** out);
CM_API void cm_system_destroy(cm_system* sys);
CM_API size_t cm_system_dim(const cm_system* sys);
CM_API size_t cm_system_param_count(const cm_system* sys);
/* dydt has dim entries; y has dim entries; p has param_count entries. */
CM_API cm_status cm_system_rhs(const cm_system* sys, double t, const double* y, const double* p,
                               double* dydt);
/* Row-major dim x dim. */
CM_API cm_status cm_system_jacobian(const cm_system* sys, double t, const double* y, const double* p,
                                    double* jac);

/* Cancellation token usable from any thread (e.g. a signal handler thread). */
CM_API cm_cancel* cm_cancel_create(void);
CM_API void cm_cancel_request(cm_cancel* c);
CM_API void cm_cancel_destroy(cm_cancel* c);

/* Lyapunov spectrum with horizon doubling. Request adds "lyap_config".
 * Result: {spectrum, mle, t_final, doublings, converged, sign_pattern,
 * divergence, classification, point, request}. */
CM_API cm_status cm_lyapunov(const char* request_json, char** out_json);

/* Two-phase chaotic-point batch. Request adds "box", "k", "mh_config",
 * "lyap_config". Writes the batch CSV to csv_path and, when jsonl_path is not
 * NULL, the same rows as JSON lines. Output is independent of `workers`.
 * Summary: {request, records, success, phase1_failed, phase2_failed}. */
CM_API cm_status cm_sample_batch(const char* request_json, int workers, const char* csv_path,
                                 const char* jsonl_path, cm_progress_fn progress, void* user,
                                 cm_cancel* cancel, char** out_summary);

/* Bifurcation scan. Request adds "param", "lo", "hi", "points", "t_total",
 * "window_start", "window_samples", "observables", "integration".
 * Summary: {request, columns, flagged}. */
CM_API cm_status cm_bifurcate(const char* request_json, int workers, const char* csv_path,
                              char** out_summary);

/* Trajectory CSV. Request adds "t_end", "stride", "integration".
 * Summary: {request, rows, terminated_early, termination_reason}. */
CM_API cm_status cm_trajectory(const char* request_json, const char* csv_path, char** out_summary);

/* Job service: persistent job store plus HTTP API under /api. */
CM_API cm_status cm_service_create(const char* data_dir, int workers, const char* static_dir,
                                   cm_service** out);
/* port 0 picks a free port; the bound port is written to out_port. */
CM_API cm_status cm_service_bind(cm_service* svc, const char* host, int port, int* out_port);
/* Blocks until cm_service_stop. */
CM_API cm_status cm_service_run(cm_service* svc);
CM_API void cm_service_stop(cm_service* svc);
/* Stops the job executor; records in flight are finished first. */
CM_API void cm_service_destroy(cm_service* svc);

#ifdef __cplusplus
}
#endif

#endif
