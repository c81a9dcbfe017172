#ifndef QUBIT_CURVATURE_H
#define QUBIT_CURVATURE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QcStatus {
  QC_STATUS_OK = 0,
  QC_STATUS_NULL_POINTER = 1,
  QC_STATUS_INVALID_ARGUMENT = 2,
  QC_STATUS_CONTRACT_VIOLATION = 3,
  QC_STATUS_NUMERICAL_CONSISTENCY = 4,
  QC_STATUS_SINGULARITY = 5,
  QC_STATUS_INSTABILITY = 6,
  QC_STATUS_UNDEFINED_EFFICIENCY = 7,
  QC_STATUS_DOMAIN = 8,
  QC_STATUS_CONVERGENCE = 9,
  QC_STATUS_IO = 10,
  QC_STATUS_INDEX_OUT_OF_RANGE = 11,
  QC_STATUS_PANIC = 12,
} QcStatus;

/**
 * Built-in two-parameter scenario.
 */
typedef struct QcScenario QcScenario;

/**
 * Simulated time series.
 */
typedef struct QcTrajectory QcTrajectory;

typedef struct QcVec3 {
  double x;
  double y;
  double z;
} QcVec3;

/**
 * Extrema over one period and their first attainment times in `[0, T)`.
 */
typedef struct QcExtrema {
  double v_max;
  double t_vmax;
  double v_min;
  double t_vmin;
  double acc_max;
  double t_accmax;
  double acc_min;
  double t_accmin;
  double kappa2_max;
  double t_k2max;
  double kappa2_min;
  double t_k2min;
  double ratio_max;
  double t_ratiomax;
  double ratio_min;
  double t_ratiomin;
  double period;
} QcExtrema;

/**
 * One grid node of a simulated trajectory.
 */
typedef struct QcRecord {
  double t;
  /**
   * Bloch vector of the integrated state.
   */
  struct QcVec3 a;
  struct QcVec3 h;
  double v;
  double acc;
  double kappa2_closed;
  double kappa2_bloch;
  double kappa2_expect;
  double ratio;
  double eta_se;
  double arc_length;
  double beta_phase;
} QcRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next `qc_` call on the same thread.
 */
const char *qc_last_error_message(void);

/**
 * Static, nul-terminated name of a status code.
 */
const char *qc_status_name(enum QcStatus status);

/**
 * Creates a scenario with precession rate `omega0 > 0` and rotation rate
 * `nu0 >= 0`. Release with `qc_scenario_free`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QcStatus qc_scenario_new(double omega0, double nu0, struct QcScenario **out);

/**
 * # Safety
 * `scenario` must be null or come from `qc_scenario_new`, and not be used afterwards.
 */
void qc_scenario_free(struct QcScenario *scenario);

/**
 * Evolution speed `v(t)`.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_speed(const struct QcScenario *scenario, double t, double *out);

/**
 * Acceleration `dv/dt`.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_acceleration(const struct QcScenario *scenario, double t, double *out);

/**
 * Closed-form curvature coefficient.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_curvature_closed(const struct QcScenario *scenario, double t, double *out);

/**
 * Squared ratio of the field components parallel and perpendicular to z.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_field_ratio(const struct QcScenario *scenario, double t, double *out);

/**
 * Transport phase `phi(t)` of the parallel-transported state.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_transport_phase(const struct QcScenario *scenario, double t, double *out);

/**
 * Arc length travelled in `[0, t]`, `t >= 0`.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_arc_length(const struct QcScenario *scenario, double t, double *out);

/**
 * Geodesic efficiency between the orthogonal states at `0` and `pi/(2 omega0)`.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_geodesic_efficiency(const struct QcScenario *scenario, double *out);

/**
 * Field `h(t)` and its time derivative. Either out-pointer may be null.
 *
 * # Safety
 * `scenario` must be live; non-null out-pointers valid for writes.
 */
enum QcStatus qc_field(const struct QcScenario *scenario,
                       double t,
                       struct QcVec3 *h,
                       struct QcVec3 *h_dot);

/**
 * Extrema summary over one period.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_extrema(const struct QcScenario *scenario, struct QcExtrema *out);

/**
 * Curvature coefficient of any evolution from the unit Bloch vector `a`,
 * the field `h` and its derivative `h_dot`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QcStatus qc_curvature_bloch(struct QcVec3 a,
                                 struct QcVec3 h,
                                 struct QcVec3 h_dot,
                                 double *out);

/**
 * Speed efficiency of `H = h0 I + h . sigma` on the state with Bloch vector `a`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QcStatus qc_speed_efficiency(double h0, struct QcVec3 h, struct QcVec3 a, double *out);

/**
 * Complete elliptic integral of the second kind, parameter convention, `m <= 1`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum QcStatus qc_elliptic_e(double m, double *out);

/**
 * Integrates the scenario from `|0>` on `steps` equal steps over
 * `[0, t_max]` and evaluates every observable at each node.
 * Release with `qc_trajectory_free`.
 *
 * # Safety
 * `scenario` must be live; `out` valid for writes.
 */
enum QcStatus qc_simulate(const struct QcScenario *scenario,
                          double t_max,
                          size_t steps,
                          struct QcTrajectory **out);

/**
 * Number of grid nodes (steps + 1); 0 for a null handle.
 *
 * # Safety
 * `trajectory` must be null or live.
 */
size_t qc_trajectory_len(const struct QcTrajectory *trajectory);

/**
 * # Safety
 * `trajectory` must be live; `out` valid for writes.
 */
enum QcStatus qc_trajectory_record(const struct QcTrajectory *trajectory,
                                   size_t index,
                                   struct QcRecord *out);

/**
 * # Safety
 * `trajectory` must be null or come from `qc_simulate`, and not be used afterwards.
 */
void qc_trajectory_free(struct QcTrajectory *trajectory);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUBIT_CURVATURE_H */
