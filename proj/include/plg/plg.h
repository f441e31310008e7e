#ifndef PLG_PLG_H
#define PLG_PLG_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PLG_BUILDING)
#    define PLG_API __declspec(dllexport)
#  else
#    define PLG_API __declspec(dllimport)
#  endif
#else
#  define PLG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Every function returning plg_status leaves a message for
   plg_last_error() on failure. */
typedef enum plg_status {
  PLG_OK = 0,
  PLG_ERR_INVALID_PARAMETER = 1,
  PLG_ERR_DECOMPOSITION = 2,
  PLG_ERR_STRUCTURE = 3,
  PLG_ERR_DEGENERATE_EPSILON = 4,
  PLG_ERR_IO = 5,
  PLG_ERR_PARSE = 6,
  PLG_ERR_CONFIG = 7,
  PLG_ERR_STATE_MISMATCH = 8,
  PLG_ERR_QUADRATURE = 9,
  PLG_ERR_INTERNAL = 99
} plg_status;

typedef enum plg_model_id { PLG_MODEL_BFL = 0, PLG_MODEL_BGL = 1, PLG_MODEL_BSGL = 2 } plg_model_id;

typedef enum plg_init_mode {
  PLG_INIT_DEFAULT = 0, /* penalized-regression start */
  PLG_INIT_ZERO = 1,    /* beta = 0, every scale 1 */
  PLG_INIT_FILE = 2     /* one-row CSV with state labels */
} plg_init_mode;

typedef struct plg_dataset plg_dataset;
typedef struct plg_chain plg_chain;

typedef struct plg_model_config {
  plg_model_id model;
  double lambda1;
  double lambda2; /* ignored by the group lasso */
  double alpha;
  double xi;
  const int* group_sizes; /* required for group models, else NULL */
  size_t num_groups;
} plg_model_config;

typedef struct plg_chain_config {
  long n_iter;
  long burn_in;
  long thin;
  uint64_t seed;
  plg_init_mode init;
  const char* init_path; /* PLG_INIT_FILE only */
  int fast_np;           /* nonzero: O(n^2 p) Gaussian draws */
} plg_chain_config;

PLG_API const char* plg_version(void);
/* Thread-local message for the last failed call on this thread. */
PLG_API const char* plg_last_error(void);
PLG_API const char* plg_status_string(plg_status status);

PLG_API plg_status plg_parse_model(const char* name, plg_model_id* out);

PLG_API plg_status plg_dataset_load_csv(const char* path, plg_dataset** out);
/* X is column-major n x p. */
PLG_API plg_status plg_dataset_create(const double* y, const double* X, size_t n, size_t p,
                                      plg_dataset** out);
PLG_API plg_status plg_dataset_dims(const plg_dataset* ds, size_t* n, size_t* p);
PLG_API void plg_dataset_free(plg_dataset* ds);

PLG_API plg_status plg_run_chain(const plg_dataset* ds, const plg_model_config* model,
                                 const plg_chain_config* config, uint64_t stream_id,
                                 plg_chain** out);
/* Chains get stream ids 0..n_chains-1 and run on at most `threads` workers
   (0 = hardware concurrency). `out` must hold n_chains pointers. */
PLG_API plg_status plg_run_chains(const plg_dataset* ds, const plg_model_config* model,
                                  const plg_chain_config* config, int n_chains, int threads,
                                  plg_chain** out);

PLG_API plg_status plg_chain_load_csv(const char* path, plg_chain** out);
PLG_API plg_status plg_chain_write_csv(const plg_chain* chain, const char* path);
PLG_API plg_status plg_chain_dims(const plg_chain* chain, size_t* rows, size_t* cols);
PLG_API plg_status plg_chain_label(const plg_chain* chain, size_t col, const char** label);
/* Row-major copy; len must be at least rows * cols. */
PLG_API plg_status plg_chain_draws(const plg_chain* chain, double* out, size_t len);
PLG_API void plg_chain_free(plg_chain* chain);

/* Summary report over one or more chains as a JSON document. `config_json`
   (nullable) is echoed under "config"; `sources` (nullable) names each chain. */
PLG_API plg_status plg_summary_json(const plg_chain* const* chains, size_t n_chains,
                                    const char* const* sources, const char* config_json,
                                    char** out_json);
PLG_API plg_status plg_drift_report_json(const plg_dataset* ds, const plg_model_config* model,
                                         double multiplier, int with_default_start,
                                         char** out_json);
/* suite: geweke, prior, drift, oracle or all. mutation may be NULL. */
PLG_API plg_status plg_verify_json(const char* suite, uint64_t seed, const char* mutation,
                                   int threads, char** out_json, int* passed);
PLG_API int plg_is_known_suite(const char* suite);

PLG_API void plg_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* PLG_PLG_H */
