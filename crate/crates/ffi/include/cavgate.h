#ifndef CAVGATE_H
#define CAVGATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_ARGUMENT = 2,
  CG_STATUS_NUMERICAL = 3,
  CG_STATUS_TRUNCATION = 4,
  CG_STATUS_BUFFER_TOO_SMALL = 5,
  CG_STATUS_PANIC = 6,
} CgStatus;

typedef enum CgT1Mode {
  CG_T1_MODE_PAPER = 0,
  CG_T1_MODE_CORRECTED = 1,
} CgT1Mode;

typedef enum CgTier {
  CG_TIER_IDEAL = 0,
  CG_TIER_CLOSED_FORM = 1,
  CG_TIER_LAMB_DICKE = 2,
  CG_TIER_LAB_FRAME = 3,
} CgTier;

/**
 * Model parameters; unresolved until used, so overrides can be applied in any order.
 */
typedef struct CgParams CgParams;

typedef struct CgSchedule CgSchedule;

/**
 * Final register state as a density matrix.
 */
typedef struct CgState CgState;

/**
 * Plain numbers of a solved schedule. Times in ns, rates in rad/ns.
 */
typedef struct CgScheduleValues {
  size_t num_qubits;
  double gamma;
  double delta;
  double period;
  double t1;
  double e_phi;
} CgScheduleValues;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static string. Do not free.
 */
const char *cg_version(void);

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * failing call on the same thread. Do not free.
 */
const char *cg_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void cg_string_free(char *s);

/**
 * Default parameters.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum CgStatus cg_params_default(struct CgParams **out);

/**
 * Parameters from a JSON document in the parameter-file schema.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` valid for a pointer write.
 */
enum CgStatus cg_params_from_json(const char *json, struct CgParams **out);

/**
 * Sets one parameter, e.g. `("g", "0.005")` or `("E_J", "40ueV")`.
 *
 * # Safety
 * `params` must come from this library; `key` and `value` nul-terminated.
 */
enum CgStatus cg_params_set(struct CgParams *params, const char *key, const char *value);

/**
 * # Safety
 * `params` must be null or a live handle from this library.
 */
void cg_params_free(struct CgParams *params);

/**
 * Solves the gate schedule for the qubit count and loop indices in `params`.
 *
 * # Safety
 * `params` must be a live handle; `out` valid for a pointer write.
 */
enum CgStatus cg_schedule_solve(const struct CgParams *params,
                                enum CgT1Mode mode,
                                struct CgSchedule **out);

/**
 * # Safety
 * `schedule` must be a live handle; `out` valid for a write.
 */
enum CgStatus cg_schedule_values(const struct CgSchedule *schedule, struct CgScheduleValues *out);

/**
 * Schedule as JSON with explicit units. Free with [`cg_string_free`].
 *
 * # Safety
 * `schedule` must be a live handle; `out` valid for a pointer write.
 */
enum CgStatus cg_schedule_json(const struct CgSchedule *schedule, char **out);

/**
 * # Safety
 * `schedule` must be null or a live handle from this library.
 */
void cg_schedule_free(struct CgSchedule *schedule);

/**
 * Generates the cluster state with the cavity starting in Fock level `fock`.
 * `fidelity` may be null.
 *
 * # Safety
 * Handles must be live; `out` valid for a pointer write.
 */
enum CgStatus cg_generate_cluster(const struct CgParams *params,
                                  const struct CgSchedule *schedule,
                                  enum CgTier tier,
                                  size_t fock,
                                  struct CgState **out,
                                  double *fidelity);

/**
 * Register dimension `2^N` of a state.
 *
 * # Safety
 * `state` must be a live handle; `dim` valid for a write.
 */
enum CgStatus cg_state_dim(const struct CgState *state, size_t *dim);

/**
 * Copies the density matrix, row-major with interleaved re/im, into `buf`
 * of `len` doubles; `len` must be at least `2 dim²`.
 *
 * # Safety
 * `state` must be a live handle; `buf` valid for `len` writes.
 */
enum CgStatus cg_state_density(const struct CgState *state, double *buf, size_t len);

/**
 * # Safety
 * `state` must be null or a live handle from this library.
 */
void cg_state_free(struct CgState *state);

/**
 * Feasibility report as JSON. Ω and the qubit lifetime come from the
 * `Omega` and `gamma_q` parameters (defaults 0.015 rad/ns and 2000 ns).
 *
 * # Safety
 * `params` must be a live handle; `out` valid for a pointer write.
 */
enum CgStatus cg_feasibility_json(const struct CgParams *params, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAVGATE_H */
