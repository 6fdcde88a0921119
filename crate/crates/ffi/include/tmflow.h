#ifndef TMFLOW_H
#define TMFLOW_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every API call.
 */
typedef enum TmfStatus {
  TmfStatus_Ok = 0,
  /**
   * A required pointer argument was NULL.
   */
  TmfStatus_NullArgument = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  TmfStatus_InvalidUtf8 = 2,
  /**
   * Parsing a machine, tape or polynomial failed.
   */
  TmfStatus_ParseError = 3,
  /**
   * Arguments were structurally valid but outside the supported range.
   */
  TmfStatus_InvalidInput = 4,
} TmfStatus;

/**
 * Opaque handle to a fully lowered machine (shift, bit shift, block map).
 */
typedef struct TmfCompiled TmfCompiled;

/**
 * Opaque machine handle.
 */
typedef struct TmfMachine TmfMachine;

/**
 * Opaque truncated vector-series handle.
 */
typedef struct TmfSeries TmfSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message into `buf` (NUL-terminated, truncated to
 * `cap`); returns the full message length in bytes.
 *
 * # Safety
 * `buf` must point to `cap` writable bytes, or be NULL with `cap` 0.
 */
uintptr_t tmf_last_error_message(char *buf, uintptr_t cap);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a tmflow function and not freed before.
 */
void tmf_string_free(char *s);

/**
 * Parses a machine description document.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum TmfStatus tmf_machine_parse(const char *text, struct TmfMachine **out);

/**
 * # Safety
 * `m` must come from [`tmf_machine_parse`] and not be freed twice.
 */
void tmf_machine_free(struct TmfMachine *m);

/**
 * # Safety
 * `m` must be a live machine handle; `out` must be writable.
 */
enum TmfStatus tmf_machine_state_count(const struct TmfMachine *m, uint32_t *out);

/**
 * Operational reversibility via disjointness of reachable image blocks.
 *
 * # Safety
 * `m` must be a live machine handle; `out` must be writable.
 */
enum TmfStatus tmf_machine_is_reversible(const struct TmfMachine *m, bool *out);

/**
 * Runs the machine from a `position:bit` tape spec. `*out_halted` reports
 * whether the halt state was reached within `max_steps` and `*out_steps`
 * the halting step (unchanged when still running).
 *
 * # Safety
 * Pointer arguments must be valid as described above.
 */
enum TmfStatus tmf_machine_run(const struct TmfMachine *m,
                               const char *tape_spec,
                               uint64_t max_steps,
                               bool *out_halted,
                               uint64_t *out_steps);

/**
 * Lowers a machine through shift, bit recoding and block map.
 *
 * # Safety
 * `m` must be a live machine handle; `out` must be writable.
 */
enum TmfStatus tmf_machine_compile(const struct TmfMachine *m, struct TmfCompiled **out);

/**
 * # Safety
 * `c` must come from [`tmf_machine_compile`] and not be freed twice.
 */
void tmf_compiled_free(struct TmfCompiled *c);

/**
 * Number of affine pieces in the full block map.
 *
 * # Safety
 * `c` must be a live compiled handle; `out` must be writable.
 */
enum TmfStatus tmf_compiled_component_count(const struct TmfCompiled *c, uintptr_t *out);

/**
 * Pairwise disjointness of image blocks, over all windows or only the
 * machine-reachable ones.
 *
 * # Safety
 * `c` must be a live compiled handle; `out` must be writable.
 */
enum TmfStatus tmf_compiled_images_disjoint(const struct TmfCompiled *c,
                                            bool reachable_only,
                                            bool *out);

/**
 * Bounded reachability of the halt coding set from an encoded start tape.
 * `*out_reached` says whether it was reached within `bound`; on success
 * `*out_step` carries the first hitting step.
 *
 * # Safety
 * Pointer arguments must be valid as described above.
 */
enum TmfStatus tmf_compiled_reach_halt(const struct TmfCompiled *c,
                                       const char *tape_spec,
                                       uint64_t bound,
                                       bool *out_reached,
                                       uint64_t *out_step);

/**
 * Renders the block-map table; free the result with [`tmf_string_free`].
 *
 * # Safety
 * `c` must be a live compiled handle; `out` must be writable.
 */
enum TmfStatus tmf_compiled_blockmap_report(const struct TmfCompiled *c, char **out);

/**
 * The configuration encoding 1/(2^q 3^r 5^s) as a decimal string "p/q";
 * free with [`tmf_string_free`].
 *
 * # Safety
 * Pointer arguments must be valid as described above.
 */
enum TmfStatus tmf_phi_encode(uint32_t state, const char *tape_spec, char **out);

/**
 * Extends the gradient of `potential` (a polynomial in x and y) to a
 * truncated field with curl u = lambda u.
 *
 * # Safety
 * Pointer arguments must be valid as described above.
 */
enum TmfStatus tmf_beltrami_extend(const char *potential,
                                   const char *lambda,
                                   uint32_t order,
                                   struct TmfSeries **out);

/**
 * # Safety
 * `s` must come from [`tmf_beltrami_extend`] and not be freed twice.
 */
void tmf_series_free(struct TmfSeries *s);

/**
 * Largest z-order through which the curl and divergence residual
 * identities hold exactly; -1 if they fail at order 0.
 *
 * # Safety
 * `s` must be a live series handle; `out` must be writable.
 */
enum TmfStatus tmf_series_residual_order(const struct TmfSeries *s, int64_t *out);

/**
 * Evaluates the truncated field; `out` receives the three components.
 *
 * # Safety
 * `s` must be a live series handle; `out` must point to three doubles.
 */
enum TmfStatus tmf_series_evaluate(const struct TmfSeries *s,
                                   double x,
                                   double y,
                                   double z,
                                   double *out);

/**
 * Whether the disk return map with parameters l, k (rationals in turns)
 * degenerates to the identity.
 *
 * # Safety
 * Pointer arguments must be valid as described above.
 */
enum TmfStatus tmf_rotation_is_identity(const char *l, const char *k, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TMFLOW_H */
