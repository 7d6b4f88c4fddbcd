/*
 * lrgae - graph self-supervised learning engine.
 *
 * C interface to the engine shared library. All functions return a status
 * code; on failure, lrgae_last_error() describes the problem for the
 * calling thread. Strings returned through output parameters are owned by
 * the caller and released with lrgae_string_free().
 */
#ifndef LRGAE_H
#define LRGAE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define LRGAE_VERSION_STRING "0.1.0"

typedef enum lrgae_status {
  LRGAE_OK = 0,
  /* Configuration, validation or precondition failure. */
  LRGAE_ERROR_INVALID = 1,
  /* Filesystem problem. */
  LRGAE_ERROR_IO = 2,
  /* Failure during execution (e.g. non-finite loss). */
  LRGAE_ERROR_RUNTIME = 3,
  /* NULL or otherwise unusable argument. */
  LRGAE_ERROR_BAD_ARGUMENT = 4
} lrgae_status;

/* Opaque graph handle. */
typedef struct lrgae_graph lrgae_graph;

const char* lrgae_version(void);

/* Message for the most recent failure on this thread; never NULL. */
const char* lrgae_last_error(void);

void lrgae_string_free(char* s);

/* Loads a dataset directory (edges.tsv, features.csv, optional labels.csv
 * and splits.json). */
lrgae_status lrgae_graph_load(const char* dir, lrgae_graph** out);

/* Generates a stochastic block model graph from a JSON spec document:
 * {"block_sizes": [..], "p_in": .., "p_out": .., "feature_dim": ..,
 *  "noise": .., "seed": ..}  (optionally wrapped as {"sbm": {...}}). */
lrgae_status lrgae_graph_generate(const char* sbm_spec_json, lrgae_graph** out);

lrgae_status lrgae_graph_save(const lrgae_graph* g, const char* dir);

void lrgae_graph_free(lrgae_graph* g);

size_t lrgae_graph_num_nodes(const lrgae_graph* g);
size_t lrgae_graph_num_edges(const lrgae_graph* g);
size_t lrgae_graph_feature_dim(const lrgae_graph* g);

/* Runs the experiment described by a JSON config document: pretrains and
 * evaluates every seed, writes the result file named by the config's
 * "output" field (when present), and returns the result JSON through
 * result_json_out. Seeds run in parallel up to $LRGAE_THREADS. */
lrgae_status lrgae_run_experiment(const char* config_json,
                                  char** result_json_out);

/* Writes an SBM dataset directory in the on-disk format. */
lrgae_status lrgae_generate_dataset(const char* sbm_spec_json,
                                    const char* out_dir);

/* Aggregates result files into a mean+-std table. text_out and csv_out are
 * both optional. */
lrgae_status lrgae_render_report(const char* const* result_paths, size_t count,
                                 char** text_out, char** csv_out);

#ifdef __cplusplus
}
#endif

#endif /* LRGAE_H */
