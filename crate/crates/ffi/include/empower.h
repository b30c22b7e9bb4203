#ifndef EMPOWER_H
#define EMPOWER_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EmpowerStatus {
  EMPOWER_STATUS_OK = 0,
  EMPOWER_STATUS_NULL_POINTER = 1,
  EMPOWER_STATUS_INVALID_ARGUMENT = 2,
  EMPOWER_STATUS_INVALID_MDP = 3,
  EMPOWER_STATUS_LAYOUT = 4,
  EMPOWER_STATUS_IO = 5,
  EMPOWER_STATUS_PARSE = 6,
  EMPOWER_STATUS_NOT_CONVERGED = 7,
  EMPOWER_STATUS_SHAPE = 8,
  EMPOWER_STATUS_DOMAIN = 9,
  EMPOWER_STATUS_PANIC = 99,
} EmpowerStatus;

typedef enum EmpowerMode {
  EMPOWER_MODE_EMPOWERED_FULL = 0,
  EMPOWER_MODE_CLASSICAL = 1,
  EMPOWER_MODE_SOFT_FIXED_PRIOR = 2,
  EMPOWER_MODE_ENTROPY_UNIFORM = 3,
} EmpowerMode;

/**
 * Opaque MDP handle.
 */
typedef struct EmpowerMdp EmpowerMdp;

/**
 * Opaque solve result handle.
 */
typedef struct EmpowerResult EmpowerResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing why the most recent call on this thread failed, or
 * null after a successful call. Valid until the next call on this thread.
 */
const char *empower_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *empower_version(void);

/**
 * Builds an MDP from dense row-major tensors: `transition` in `(s, a, s')`
 * order, `reward` in `(s, a)` order, `terminal` as 0/1 bytes.
 *
 * # Safety
 * Each pointer must reference at least the stated number of elements and
 * `out` must be writable.
 */
enum EmpowerStatus empower_mdp_new(size_t n_states,
                                   size_t n_actions,
                                   const double *transition,
                                   const double *reward,
                                   const uint8_t *terminal,
                                   double discount,
                                   struct EmpowerMdp **out);

/**
 * Loads an MDP JSON document.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum EmpowerStatus empower_mdp_load(const char *path, struct EmpowerMdp **out);

/**
 * Builds a built-in grid world (`"grid-a"` or `"grid-b"`).
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` writable.
 */
enum EmpowerStatus empower_mdp_builtin(const char *name, struct EmpowerMdp **out);

/**
 * # Safety
 * `mdp` must be a live handle or null.
 */
size_t empower_mdp_n_states(const struct EmpowerMdp *mdp);

/**
 * # Safety
 * `mdp` must be a live handle or null.
 */
size_t empower_mdp_n_actions(const struct EmpowerMdp *mdp);

/**
 * # Safety
 * `mdp` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void empower_mdp_free(struct EmpowerMdp *mdp);

/**
 * Solves `mdp` for the given tradeoff; `mode` is an [`EmpowerMode`] value.
 * `β = 0` selects classical value
 * iteration whatever `mode` says. A solve that stops at the iteration cap
 * still produces a result; check [`empower_result_converged`].
 *
 * # Safety
 * `mdp` must be a live handle and `out` writable.
 */
enum EmpowerStatus empower_solve(const struct EmpowerMdp *mdp,
                                 double alpha,
                                 double beta,
                                 uint32_t mode,
                                 double outer_tolerance,
                                 double inner_tolerance,
                                 struct EmpowerResult **out);

/**
 * Copies `V*` into `out`, which must hold `n_states` values.
 *
 * # Safety
 * `result` must be a live handle and `out` must reference `len` doubles.
 */
enum EmpowerStatus empower_result_values(const struct EmpowerResult *result,
                                         double *out,
                                         size_t len);

/**
 * Copies `π*(a|s)` row-major into `out` (`n_states · n_actions` values).
 *
 * # Safety
 * `result` must be a live handle and `out` must reference `len` doubles.
 */
enum EmpowerStatus empower_result_policy(const struct EmpowerResult *result,
                                         double *out,
                                         size_t len);

/**
 * Copies the per-sweep residuals into `out`, which must hold
 * [`empower_result_outer_iterations`] values.
 *
 * # Safety
 * `result` must be a live handle and `out` must reference `len` doubles.
 */
enum EmpowerStatus empower_result_residuals(const struct EmpowerResult *result,
                                            double *out,
                                            size_t len);

/**
 * # Safety
 * `result` must be a live handle or null.
 */
size_t empower_result_outer_iterations(const struct EmpowerResult *result);

/**
 * 1 if the outer loop met its tolerance, 0 otherwise (or for null).
 *
 * # Safety
 * `result` must be a live handle or null.
 */
int32_t empower_result_converged(const struct EmpowerResult *result);

/**
 * # Safety
 * `result` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void empower_result_free(struct EmpowerResult *result);

/**
 * Capacity in nats of the channel `probs` (row-major `(input, output)`).
 * When `input_dist` is non-null it receives the optimal input distribution
 * (`n_inputs` values).
 *
 * # Safety
 * `probs` must reference `n_inputs · n_outputs` doubles, `capacity` must be
 * writable, and `input_dist` must be null or reference `n_inputs` doubles.
 */
enum EmpowerStatus empower_channel_capacity(const double *probs,
                                            size_t n_inputs,
                                            size_t n_outputs,
                                            double tolerance,
                                            double *capacity,
                                            double *input_dist);

/**
 * Outer sweeps guaranteed to bring values within `epsilon` of the optimum.
 *
 * # Safety
 * `out` must be writable.
 */
enum EmpowerStatus empower_iteration_bound(double epsilon, double gamma, double eta, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMPOWER_H */
