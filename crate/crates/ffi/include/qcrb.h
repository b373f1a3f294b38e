#ifndef QCRB_H
#define QCRB_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; 2–4 match the exit codes of the `qcrb` binary.
 */
typedef enum QcrbStatus {
  QCRB_STATUS_OK = 0,
  QCRB_STATUS_NULL_POINTER = 1,
  QCRB_STATUS_INVALID_INPUT = 2,
  QCRB_STATUS_NUMERICAL = 3,
  QCRB_STATUS_INVARIANT = 4,
  QCRB_STATUS_PANIC = 5,
} QcrbStatus;

typedef enum QcrbEstimatorKind {
  QCRB_ESTIMATOR_KIND_PHOTON_COUNTING = 0,
  QCRB_ESTIMATOR_KIND_HETERODYNE_RADIOMETER = 1,
  QCRB_ESTIMATOR_KIND_TWO_DETECTOR_CORRELATION = 2,
} QcrbEstimatorKind;

/**
 * Opaque source description.
 */
typedef struct QcrbSourceSpec QcrbSourceSpec;

typedef struct QcrbBoundReport {
  double qfi_single;
  double qfi_total;
  double var_bound;
  double rel_sens_bound;
  double temp_rel_sens_bound;
} QcrbBoundReport;

typedef struct QcrbCompetitorCurves {
  double radiometer;
  double lkd_claimed;
  double zmuidzinas;
  double t_samp;
  bool lkd_regime_valid;
  bool lkd_below_bound;
  double lkd_gap_factor;
} QcrbCompetitorCurves;

typedef struct QcrbQfiCheck {
  double n0;
  size_t cutoff;
  double tail_mass;
  double qfi_analytic;
  double qfi_numeric;
  double qfi_rel_error;
  double sld_residual;
  double sld_max_deviation;
  bool pass;
} QcrbQfiCheck;

typedef struct QcrbSensitivityReport {
  size_t trials;
  size_t modes;
  double n0;
  double mean_estimate;
  double bias;
  double bias_sigma;
  double variance;
  double rel_sensitivity;
  double bootstrap_sigma;
  double rel_sensitivity_ci_low;
  double rel_sensitivity_ci_high;
  double bound;
  double ratio_to_bound;
  double expected_rel_sensitivity;
  bool bound_satisfied;
  uint64_t seed;
} QcrbSensitivityReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, or 0 when
 * there is no error.
 *
 * # Safety
 * `buf` is null or valid for `len` bytes.
 */
size_t qcrb_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qcrb_version(void);

/**
 * # Safety
 * `out` is null or valid for writes. The handle must be released with
 * [`qcrb_source_spec_free`].
 */
enum QcrbStatus qcrb_source_spec_from_occupation(double n0,
                                                 double nu0,
                                                 double delta_nu,
                                                 double t_obs,
                                                 struct QcrbSourceSpec **out);

/**
 * # Safety
 * As [`qcrb_source_spec_from_occupation`].
 */
enum QcrbStatus qcrb_source_spec_from_temperature(double t_s,
                                                  double nu0,
                                                  double delta_nu,
                                                  double t_obs,
                                                  struct QcrbSourceSpec **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `spec` is null or a handle not yet freed.
 */
void qcrb_source_spec_free(struct QcrbSourceSpec *spec);

/**
 * Occupation, time-bandwidth product and mode count of a source.
 *
 * # Safety
 * `spec` is a live handle; out pointers are null or valid for writes.
 */
enum QcrbStatus qcrb_source_spec_summary(const struct QcrbSourceSpec *spec,
                                         double *n0,
                                         double *time_bandwidth,
                                         uint64_t *modes);

/**
 * `1/(exp(hν/kT_s) − 1)`.
 *
 * # Safety
 * `out` is null or valid for writes.
 */
enum QcrbStatus qcrb_planck_occupation(double nu, double t_s, double *out);

/**
 * Single-mode quantum Fisher information `1/(n₀(n₀+1))`.
 *
 * # Safety
 * `out` is null or valid for writes.
 */
enum QcrbStatus qcrb_qfi_single_mode(double n0, double *out);

/**
 * # Safety
 * `spec` is a live handle; `out` is null or valid for writes.
 */
enum QcrbStatus qcrb_bound_report(const struct QcrbSourceSpec *spec, struct QcrbBoundReport *out);

/**
 * # Safety
 * `spec` is a live handle; `out` is null or valid for writes.
 */
enum QcrbStatus qcrb_competitor_sensitivities(const struct QcrbSourceSpec *spec,
                                              double t_samp,
                                              struct QcrbCompetitorCurves *out);

/**
 * Numeric SLD and QFI against the closed forms. `cutoff = 0` picks the
 * recommended Fock cutoff; any other value is used as is.
 *
 * # Safety
 * `out` is null or valid for writes.
 */
enum QcrbStatus qcrb_qfi_check(double n0, size_t cutoff, struct QcrbQfiCheck *out);

/**
 * Monte Carlo run of one scheme; `kind` is a `QcrbEstimatorKind` value.
 * The report is written even when the bound check fails, in which case the
 * status is `Invariant`.
 *
 * # Safety
 * `spec` is a live handle; `out` is null or valid for writes.
 */
enum QcrbStatus qcrb_run_experiment(const struct QcrbSourceSpec *spec,
                                    uint32_t kind,
                                    size_t trials,
                                    uint64_t master_seed,
                                    struct QcrbSensitivityReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCRB_H */
