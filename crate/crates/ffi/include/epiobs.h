#ifndef EPIOBS_H
#define EPIOBS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EpiMode {
  EPI_MODE_K = 0,
  EPI_MODE_D = 1,
} EpiMode;

typedef enum EpiStatus {
  EPI_STATUS_OK = 0,
  EPI_STATUS_NULL_ARGUMENT = 1,
  EPI_STATUS_INVALID_UTF8 = 2,
  EPI_STATUS_PARSE = 3,
  EPI_STATUS_MODEL = 4,
  EPI_STATUS_LOGIC = 5,
  EPI_STATUS_SIMULATION = 6,
  /**
   * A synthesized obstruction failed its own verification.
   */
  EPI_STATUS_INCONSISTENT = 7,
  EPI_STATUS_INVALID_ARGUMENT = 8,
  EPI_STATUS_PANIC = 9,
} EpiStatus;

typedef struct EpiAction EpiAction;

typedef struct EpiModel EpiModel;

typedef struct EpiRelation EpiRelation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library from this thread.
 */
const char *epi_last_error(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void epi_string_free(char *s);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EpiStatus epi_model_from_json(const char *json, struct EpiModel **out);

/**
 * # Safety
 * `m` must be a live model handle and `out` a valid pointer.
 */
enum EpiStatus epi_model_to_json(const struct EpiModel *m, char **out);

/**
 * Number of facets, or 0 for a NULL handle.
 *
 * # Safety
 * `m` must be NULL or a live model handle.
 */
size_t epi_model_facet_count(const struct EpiModel *m);

/**
 * # Safety
 * `m` must be NULL or a model handle not yet freed.
 */
void epi_model_free(struct EpiModel *m);

/**
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum EpiStatus epi_action_from_json(const char *json, struct EpiAction **out);

/**
 * # Safety
 * `a` must be a live action handle and `out` a valid pointer.
 */
enum EpiStatus epi_action_to_json(const struct EpiAction *a, char **out);

/**
 * # Safety
 * `a` must be NULL or an action handle not yet freed.
 */
void epi_action_free(struct EpiAction *a);

/**
 * The input model over agents and values named `0, 1, ...`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum EpiStatus epi_input_model(size_t agents, size_t values, struct EpiModel **out);

/**
 * # Safety
 * `input` must be a live model handle and `out` a valid pointer.
 */
enum EpiStatus epi_gen_is(size_t rounds, const struct EpiModel *input, struct EpiAction **out);

/**
 * k-set agreement over every value of the input's workspace.
 *
 * # Safety
 * `input` must be a live model handle and `out` a valid pointer.
 */
enum EpiStatus epi_gen_sa(size_t k, const struct EpiModel *input, struct EpiAction **out);

/**
 * The know-all protocol repeating one graph for `rounds` rounds. `edges`
 * holds `edge_count` pairs `(p, q)` laid out flat; missing self-loops are
 * added.
 *
 * # Safety
 * `edges` must point to `2 * edge_count` values (or be NULL when
 * `edge_count` is 0), `input` must be a live model handle and `out` a valid
 * pointer.
 */
enum EpiStatus epi_gen_knowall(const size_t *edges,
                               size_t edge_count,
                               size_t rounds,
                               const struct EpiModel *input,
                               struct EpiAction **out);

/**
 * # Safety
 * `input` and `action` must be live handles and `out` a valid pointer.
 */
enum EpiStatus epi_product_update(const struct EpiModel *input,
                                  const struct EpiAction *action,
                                  struct EpiModel **out);

/**
 * The maximum simulation from `protocol` to `task` and the step at which
 * the chain stabilized.
 *
 * # Safety
 * `protocol` and `task` must be live handles; `out` and `stabilized_at`
 * must be valid pointers.
 */
enum EpiStatus epi_max_simulation(const struct EpiModel *protocol,
                                  const struct EpiModel *task,
                                  enum EpiMode mode,
                                  struct EpiRelation **out,
                                  size_t *stabilized_at);

/**
 * Number of pairs, or 0 for a NULL handle.
 *
 * # Safety
 * `r` must be NULL or a live relation handle.
 */
size_t epi_relation_len(const struct EpiRelation *r);

/**
 * # Safety
 * `r` must be NULL or a live relation handle.
 */
bool epi_relation_is_total(const struct EpiRelation *r);

/**
 * # Safety
 * `r` must be NULL or a live relation handle.
 */
bool epi_relation_contains(const struct EpiRelation *r, size_t x, size_t x_prime);

/**
 * # Safety
 * `r` must be a live relation handle and `out` a valid pointer.
 */
enum EpiStatus epi_relation_to_json(const struct EpiRelation *r, char **out);

/**
 * # Safety
 * `r` must be NULL or a relation handle not yet freed.
 */
void epi_relation_free(struct EpiRelation *r);

/**
 * Decides whether an obstruction exists. The verdict, including the formula
 * in shared S-expression form when one exists, is written as JSON.
 *
 * # Safety
 * `protocol` and `task` must be live handles; `exists` and `verdict_json`
 * must be valid pointers.
 */
enum EpiStatus epi_decide_obstruction(const struct EpiModel *protocol,
                                      const struct EpiModel *task,
                                      enum EpiMode mode,
                                      bool *exists,
                                      char **verdict_json);

/**
 * Evaluates an S-expression formula at one facet.
 *
 * # Safety
 * `m` must be a live model handle, `formula` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum EpiStatus epi_eval_formula(const struct EpiModel *m,
                                const char *formula,
                                size_t facet,
                                bool *out);

/**
 * Whether an S-expression formula holds at every facet.
 *
 * # Safety
 * `m` must be a live model handle, `formula` a NUL-terminated string and
 * `out` a valid pointer.
 */
enum EpiStatus epi_holds_everywhere(const struct EpiModel *m, const char *formula, bool *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPIOBS_H */
