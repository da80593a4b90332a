#ifndef THRESNET_H
#define THRESNET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum ThresnetStatus {
  THRESNET_STATUS_OK = 0,
  THRESNET_STATUS_NULL_POINTER = 1,
  THRESNET_STATUS_INVALID_UTF8 = 2,
  THRESNET_STATUS_INVALID_INPUT = 3,
  THRESNET_STATUS_COMPUTATION_FAILED = 4,
  // The run completed but its statistical check failed; outputs are set.
  THRESNET_STATUS_STATISTICAL_FAILURE = 5,
  THRESNET_STATUS_PANIC = 6,
} ThresnetStatus;

// A simple undirected graph.
typedef struct ThresnetGraph ThresnetGraph;

// Weight law together with a connection rule.
typedef struct ThresnetModel ThresnetModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer
// stays valid until the next call into this library on the same thread.
const char *thresnet_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *thresnet_version(void);

// Release a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void thresnet_string_free(char *s);

// Build a model from a JSON weight law (e.g. `{"kind":"exponential","lambda":1}`)
// and a JSON connection rule.
//
// # Safety
// String arguments must be NUL-terminated; `out` must be writable.
enum ThresnetStatus thresnet_model_new(const char *law_json,
                                       const char *rule_json,
                                       struct ThresnetModel **out);

// # Safety
// `model` must be null or a live handle from [`thresnet_model_new`].
void thresnet_model_free(struct ThresnetModel *model);

// Sample a graph on `n` vertices. The same `(model, n, seed)` yields the
// graph printed by the command-line `generate`.
//
// # Safety
// `model` must be a live handle; `out` must be writable.
enum ThresnetStatus thresnet_graph_generate(const struct ThresnetModel *model,
                                            size_t n,
                                            uint64_t seed,
                                            struct ThresnetGraph **out);

// Graph on `n` vertices from `edge_count` 0-indexed pairs stored flat in
// `edges` (`2 * edge_count` entries).
//
// # Safety
// `edges` must point to `2 * edge_count` readable values (or be null when
// `edge_count` is 0); `out` must be writable.
enum ThresnetStatus thresnet_graph_from_edges(size_t n,
                                              const uint32_t *edges,
                                              size_t edge_count,
                                              struct ThresnetGraph **out);

// # Safety
// `graph` must be null or a live graph handle.
void thresnet_graph_free(struct ThresnetGraph *graph);

// Vertex count, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live graph handle.
size_t thresnet_graph_vertex_count(const struct ThresnetGraph *graph);

// Edge count, or 0 for a null handle.
//
// # Safety
// `graph` must be null or a live graph handle.
uint64_t thresnet_graph_edge_count(const struct ThresnetGraph *graph);

// Degree of the 0-indexed `vertex`.
//
// # Safety
// `graph` must be a live handle; `out` must be writable.
enum ThresnetStatus thresnet_graph_degree(const struct ThresnetGraph *graph,
                                          size_t vertex,
                                          uint64_t *out);

// Number of induced subgraphs in the family described by `family_json`
// (e.g. `{"name":"triangle"}`).
//
// # Safety
// `graph` must be a live handle; `family_json` NUL-terminated; `out` writable.
enum ThresnetStatus thresnet_census_total(const struct ThresnetGraph *graph,
                                          const char *family_json,
                                          uint64_t *out);

// Full census, including per-vertex counts, as a JSON string.
//
// # Safety
// As [`thresnet_census_total`]; the string goes to [`thresnet_string_free`].
enum ThresnetStatus thresnet_census_json(const struct ThresnetGraph *graph,
                                         const char *family_json,
                                         char **out);

// Local clustering coefficient of `vertex`; `w` is used for degree <= 1.
//
// # Safety
// `graph` must be a live handle; `out` writable.
enum ThresnetStatus thresnet_local_cc(const struct ThresnetGraph *graph,
                                      size_t vertex,
                                      double w,
                                      double *out);

// Mean local clustering coefficient; `w` is used for degree <= 1.
//
// # Safety
// `graph` must be a live handle; `out` writable.
enum ThresnetStatus thresnet_global_cc(const struct ThresnetGraph *graph, double w, double *out);

// Mean local clustering coefficient over vertices of degree >= 2. Fails
// with `COMPUTATION_FAILED` when there are none.
//
// # Safety
// `graph` must be a live handle; `out` writable.
enum ThresnetStatus thresnet_filtered_cc(const struct ThresnetGraph *graph, double *out);

// Limit law of the normalized degree as JSON (`atoms` and `pieces`).
//
// # Safety
// `model` must be a live handle; `out` writable; the string goes to
// [`thresnet_string_free`].
enum ThresnetStatus thresnet_degree_law_json(const struct ThresnetModel *model, char **out);

// Run a command-line subcommand (`"census"`, `"clt"`, ...) on a JSON
// experiment configuration and return its primary artifact. A failed
// statistical check still sets `out` and returns `STATISTICAL_FAILURE`.
// Output paths in the configuration are ignored.
//
// # Safety
// String arguments NUL-terminated; `out` writable; the string goes to
// [`thresnet_string_free`].
enum ThresnetStatus thresnet_run_json(const char *subcommand, const char *config_json, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THRESNET_H */
