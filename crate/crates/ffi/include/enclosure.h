#ifndef ENCLOSURE_H
#define ENCLOSURE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EnclosureStatus {
  ENCLOSURE_STATUS_OK = 0,
  ENCLOSURE_STATUS_NULL_ARGUMENT = 1,
  ENCLOSURE_STATUS_INVALID_UTF8 = 2,
  ENCLOSURE_STATUS_INVALID_CONFIG = 3,
  ENCLOSURE_STATUS_HYPOTHESIS_VIOLATED = 4,
  ENCLOSURE_STATUS_NUMERICAL_FAILURE = 5,
  ENCLOSURE_STATUS_IO = 6,
  ENCLOSURE_STATUS_PANIC = 7,
} EnclosureStatus;

typedef enum EnclosureMode {
  ENCLOSURE_MODE_GEOMETRY = 0,
  ENCLOSURE_MODE_SEMI_ANALYTIC = 1,
  ENCLOSURE_MODE_FDTD = 2,
} EnclosureMode;

// Reports available through [`enclosure_report_json`].
typedef enum EnclosureReport {
  ENCLOSURE_REPORT_SCAN = 0,
  ENCLOSURE_REPORT_CURVATURE = 1,
  ENCLOSURE_REPORT_RECONSTRUCT_BALL = 2,
  ENCLOSURE_REPORT_PRINCIPAL = 3,
} EnclosureReport;

// Opaque run handle.
typedef struct EnclosureSession EnclosureSession;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *enclosure_version(void);

// Copies the last error message of this thread into `buf` (truncated to
// `len` bytes including the terminator) and returns the full length
// including the terminator. `buf` may be null to query the length.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
uintptr_t enclosure_last_error(char *buf, uintptr_t len);

// Parses and validates a JSON run configuration. Relative mesh paths are
// resolved against `base_dir`, which may be null for the working directory.
//
// # Safety
// `json` and a non-null `base_dir` must be NUL-terminated strings; `out`
// must be writable.
enum EnclosureStatus enclosure_session_from_json(const char *json,
                                                 const char *base_dir,
                                                 struct EnclosureSession **out);

// The unit sphere with source and receiver balls of radius 0.5 at
// `(4, 0, 0)` and `(0, 4, 0)`.
//
// # Safety
// `out` must be writable.
enum EnclosureStatus enclosure_session_s1(struct EnclosureSession **out);

// # Safety
// `s` must be null or a handle from this library not yet freed.
void enclosure_session_free(struct EnclosureSession *s);

// Switches the data source, revalidating the configuration. Stored traces
// are kept.
//
// # Safety
// `s` must be a live handle.
enum EnclosureStatus enclosure_session_set_mode(struct EnclosureSession *s,
                                                enum EnclosureMode mode);

// Runs the wave solver (and its companion, if configured) and keeps the
// traces in the session.
//
// # Safety
// `s` must be a live handle.
enum EnclosureStatus enclosure_session_simulate(struct EnclosureSession *s);

// Loads trace archives written by the command-line tool; `companion_path`
// may be null.
//
// # Safety
// `s` must be a live handle; paths must be NUL-terminated strings.
enum EnclosureStatus enclosure_session_load_traces(struct EnclosureSession *s,
                                                   const char *trace_path,
                                                   const char *companion_path);

// Exact `min φ - η - η'` from the configured geometry.
//
// # Safety
// `s` must be a live handle; `out` must be writable.
enum EnclosureStatus enclosure_decay_threshold(const struct EnclosureSession *s, double *out);

// Decay-rate estimate of `min φ - η - η'` from the session's data source.
//
// # Safety
// `s` must be a live handle; non-null outputs must be writable.
enum EnclosureStatus enclosure_enclose(const struct EnclosureSession *s,
                                       double *rate,
                                       double *uncertainty);

// First reflection point and outward normal of the configured obstacle.
//
// # Safety
// `s` must be a live handle; non-null outputs must hold 3 doubles.
enum EnclosureStatus enclosure_first_reflector(const struct EnclosureSession *s,
                                               double *q,
                                               double *normal);

// Center and radius of a ball obstacle recovered from the data source.
//
// # Safety
// `s` must be a live handle; `center` must hold 3 doubles.
enum EnclosureStatus enclosure_reconstruct_ball(const struct EnclosureSession *s,
                                                double *center,
                                                double *radius);

// Full report as a JSON string. `q` (3 doubles) selects the reflector for
// curvature and principal reports; when null the geometric first
// reflector is used.
//
// # Safety
// `s` must be a live handle; `q` null or 3 doubles; `out` writable.
enum EnclosureStatus enclosure_report_json(const struct EnclosureSession *s,
                                           enum EnclosureReport report,
                                           const double *q,
                                           char **out);

// # Safety
// `p` must be null or a string returned by this library.
void enclosure_string_free(char *p);

// `(1/4π) ∫_B e^{-τ|x-y|}/|x-y| dy` for the ball `B` in closed form.
//
// # Safety
// `center` and `x` must hold 3 doubles; `out` must be writable.
enum EnclosureStatus enclosure_yukawa_ball(const double *center,
                                           double radius,
                                           double tau,
                                           const double *x,
                                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ENCLOSURE_H */
