#ifndef SPINFORGE_H
#define SPINFORGE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The first four match the command-line exit codes.
 */
typedef enum SfStatus {
  SF_STATUS_OK = 0,
  SF_STATUS_VERIFICATION_FAILED = 1,
  SF_STATUS_INFEASIBLE = 2,
  SF_STATUS_ERROR = 3,
  SF_STATUS_NULL_POINTER = 4,
  SF_STATUS_INVALID_ARGUMENT = 5,
  SF_STATUS_PANIC = 6,
} SfStatus;

typedef enum SfScheduleMode {
  SF_SCHEDULE_MODE_DERIVE_CONSTANTS = 0,
  SF_SCHEDULE_MODE_SHARED_CONSTANTS = 1,
} SfScheduleMode;

/**
 * Physical constants (opaque).
 */
typedef struct SfConfig SfConfig;

/**
 * Dense complex matrix (opaque).
 */
typedef struct SfMatrix SfMatrix;

/**
 * Phase-insensitive comparison of two operators.
 */
typedef struct SfFidelityReport {
  double fidelity;
  double global_phase_rad;
  double max_abs_dev;
} SfFidelityReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call into the library.
 */
const char *sf_last_error_message(void);

/**
 * Library version, static storage.
 */
const char *sf_version(void);

/**
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sf_string_free(char *s);

/**
 * Electron constants in SI units, on resonance.
 */
struct SfConfig *sf_config_new_default(void);

/**
 * `gamma = omega = b0 = 1`, other constants zero.
 */
struct SfConfig *sf_config_new_natural(void);

/**
 * Parses a TOML file body with any of `gamma, b0, b1, omega, j, b_prime`.
 *
 * # Safety
 * `toml` must be a NUL-terminated string; `out` must be writable.
 */
enum SfStatus sf_config_from_toml(const char *toml, struct SfConfig **out);

/**
 * Sets one constant by name. Resonance is not enforced here.
 *
 * # Safety
 * `cfg` must be a live handle and `key` a NUL-terminated string.
 */
enum SfStatus sf_config_set(struct SfConfig *cfg, const char *key, double value);

/**
 * # Safety
 * `cfg` must be a live handle, `key` a NUL-terminated string, `out` writable.
 */
enum SfStatus sf_config_get(const struct SfConfig *cfg, const char *key, double *out);

/**
 * # Safety
 * `cfg` must come from this library and not have been freed.
 */
void sf_config_free(struct SfConfig *cfg);

/**
 * Synthesises a gate from pulses. On `SF_OK` or `SF_VERIFICATION_FAILED`
 * `out_matrix` holds the pulse-layer unitary and `out_report` (if non-null)
 * its comparison with the ideal gate.
 *
 * # Safety
 * Pointers must be valid; `gate` NUL-terminated; `out_report` may be null.
 */
enum SfStatus sf_build_gate(const struct SfConfig *cfg,
                            const char *gate,
                            enum SfScheduleMode mode,
                            struct SfMatrix **out_matrix,
                            struct SfFidelityReport *out_report);

/**
 * The ideal matrix of a gate.
 *
 * # Safety
 * `gate` must be NUL-terminated and `out_matrix` writable.
 */
enum SfStatus sf_ideal_gate(const char *gate, struct SfMatrix **out_matrix);

/**
 * # Safety
 * Both handles must be live; `out` writable.
 */
enum SfStatus sf_phase_fidelity(const struct SfMatrix *built,
                                const struct SfMatrix *target,
                                struct SfFidelityReport *out);

/**
 * Timing table of a gate as JSON. Free the string with `sf_string_free`.
 *
 * # Safety
 * Pointers must be valid; `gate` NUL-terminated.
 */
enum SfStatus sf_schedule_json(const struct SfConfig *cfg,
                               const char *gate,
                               enum SfScheduleMode mode,
                               char **out_json);

/**
 * Runs the verification checks for `scope` (`"all"` or a gate name) and
 * writes the report as JSON. Returns `SF_VERIFICATION_FAILED` when any
 * check fails; the report is written either way.
 *
 * # Safety
 * Pointers must be valid; `scope` NUL-terminated.
 */
enum SfStatus sf_verify_json(const struct SfConfig *cfg,
                             const char *scope,
                             bool oracle,
                             char **out_json);

/**
 * Integrates the lab-frame equation for `n` spins from the state given by
 * `re`/`im` (length `2^n`) to `t_final`, overwriting the buffers with the
 * final state. `dt <= 0` picks a step automatically.
 *
 * # Safety
 * `re` and `im` must each point to `2^n` writable doubles.
 */
enum SfStatus sf_simulate(const struct SfConfig *cfg,
                          size_t n,
                          double *re,
                          double *im,
                          double t_final,
                          double dt);

/**
 * Matrix dimension, 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t sf_matrix_dim(const struct SfMatrix *m);

/**
 * # Safety
 * `m` must be a live handle; `re` and `im` writable.
 */
enum SfStatus sf_matrix_get(const struct SfMatrix *m,
                            size_t row,
                            size_t col,
                            double *re,
                            double *im);

/**
 * # Safety
 * `m` must be a live handle; `out_json` writable.
 */
enum SfStatus sf_matrix_to_json(const struct SfMatrix *m, char **out_json);

/**
 * # Safety
 * `m` must come from this library and not have been freed.
 */
void sf_matrix_free(struct SfMatrix *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPINFORGE_H */
