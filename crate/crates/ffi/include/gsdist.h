#ifndef GSDIST_H
#define GSDIST_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum GsdStatus {
  GSD_OK = 0,
  GSD_ERR_NULL = 1,
  GSD_ERR_UTF8 = 2,
  GSD_ERR_INVALID = 3,
  GSD_ERR_VERIFY = 4,
  GSD_ERR_IO = 5,
  GSD_ERR_INTERNAL = 6,
  GSD_ERR_PANIC = 7,
} GsdStatus;

typedef struct GsdGraph GsdGraph;

typedef struct GsdSchedule GsdSchedule;

typedef struct GsdSystem GsdSystem;

typedef struct GsdResources {
  size_t bell_pairs;
  size_t central_qubit_highwater;
  size_t cz_count;
  size_t lc_count;
  size_t meas_count;
  size_t rounds;
  size_t cc_bits;
} GsdResources;

typedef struct GsdFidelity {
  double mean;
  double ci95_halfwidth;
  size_t trials;
} GsdFidelity;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until
 * the next call into this library.
 */
const char *gsd_last_error(void);

/**
 * # Safety
 * `s` must come from this library, or be NULL.
 */
void gsd_string_free(char *s);

/**
 * Load a graph from a generator string (`complete:6`, `gnp:10,0.5,3`) or
 * an edge-list file path.
 *
 * # Safety
 * `spec` must be a NUL-terminated string; `out` must be writable.
 */
enum GsdStatus gsd_graph_load(const char *spec, struct GsdGraph **out);

/**
 * Graph on `0..n` with `m` edges given as `2m` endpoints.
 *
 * # Safety
 * `edges` must point to `2 * m` values (or be NULL when `m == 0`).
 */
enum GsdStatus gsd_graph_from_edges(size_t n, const size_t *edges, size_t m, struct GsdGraph **out);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
size_t gsd_graph_vertex_count(const struct GsdGraph *g);

/**
 * # Safety
 * `g` must be a live graph handle.
 */
size_t gsd_graph_edge_count(const struct GsdGraph *g);

/**
 * # Safety
 * `g` must come from this library, or be NULL.
 */
void gsd_graph_free(struct GsdGraph *g);

/**
 * SC system for `g` using `method` (`auto`, `exact`, `closed-form`,
 * `greedy`, `elimination`).
 *
 * # Safety
 * `g` must be a live graph handle and `method` a NUL-terminated string.
 */
enum GsdStatus gsd_solve(const struct GsdGraph *g, const char *method, struct GsdSystem **out);

/**
 * # Safety
 * `s` must be a live system handle.
 */
size_t gsd_system_len(const struct GsdSystem *s);

/**
 * The system in its text format.
 *
 * # Safety
 * `s` must be a live system handle; `out` must be writable.
 */
enum GsdStatus gsd_system_to_text(const struct GsdSystem *s, char **out);

/**
 * # Safety
 * `s` must come from this library, or be NULL.
 */
void gsd_system_free(struct GsdSystem *s);

/**
 * Compile a distribution schedule. `protocol` is `sc`, `sc-parallel`,
 * `factory` or `factory-parallel`; `aux == 0` selects the default
 * auxiliary count.
 *
 * # Safety
 * `g` must be a live graph handle and `protocol` a NUL-terminated string.
 */
enum GsdStatus gsd_schedule_build(const struct GsdGraph *g,
                                  const char *protocol,
                                  size_t aux,
                                  struct GsdSchedule **out);

/**
 * # Safety
 * `s` must be a live schedule handle; `out` must be writable.
 */
enum GsdStatus gsd_schedule_resources(const struct GsdSchedule *s, struct GsdResources *out);

/**
 * The schedule as CSV (`round,op_kind,qubit1,qubit2,phase_annotation`).
 *
 * # Safety
 * `s` must be a live schedule handle; `out` must be writable.
 */
enum GsdStatus gsd_schedule_to_csv(const struct GsdSchedule *s, char **out);

/**
 * Monte Carlo fidelity; deterministic for a fixed `seed`.
 *
 * # Safety
 * `s` must be a live schedule handle; `out` must be writable.
 */
enum GsdStatus gsd_schedule_fidelity(const struct GsdSchedule *s,
                                     double p_gate,
                                     double p_mem,
                                     bool noise_on_measure,
                                     size_t trials,
                                     uint64_t seed,
                                     struct GsdFidelity *out);

/**
 * # Safety
 * `s` must come from this library, or be NULL.
 */
void gsd_schedule_free(struct GsdSchedule *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GSDIST_H */
