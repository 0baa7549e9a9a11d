/* C API for the latent-space-embedding collaborative learning library.
 *
 * Conventions:
 *   - every fallible call returns lse_status; 0 is success
 *   - on failure, lse_last_error() returns a thread-local message describing
 *     the most recent error in the calling thread
 *   - objects are opaque handles created by the library and released with
 *     the matching *_free function; out-parameters are written only on success
 *   - strings returned through char** out-parameters are heap-allocated and
 *     must be released with lse_string_free
 *   - structured options are passed as JSON text (documented per function)
 */
#ifndef LSE_C_H
#define LSE_C_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lse_status {
    LSE_OK = 0,
    LSE_ERR_USAGE = 1,   /* invalid arguments or contract misuse */
    LSE_ERR_DATA = 2,    /* malformed or incompatible input data */
    LSE_ERR_RUNTIME = 3  /* I/O, network or numeric failure */
} lse_status;

typedef struct lse_dataset lse_dataset; /* ids + named feature columns + optional target */
typedef struct lse_model lse_model;     /* autoencoder + bundled input scaler */
typedef struct lse_table lse_table;     /* observation ids + latent vectors */

const char* lse_version(void);
const char* lse_last_error(void);
void lse_string_free(char* s);

/* Worker threads for internal matrix products (default 1). Results are
 * bitwise identical for every thread count. */
void lse_set_num_threads(int n);

/* ---- datasets ---------------------------------------------------------- */

/* task: "regression", "classification", or NULL when no target semantics are
 * needed. target_column may be NULL for feature-only files. */
lse_status lse_dataset_load_csv(const char* path, const char* id_column,
                                const char* target_column, const char* task,
                                lse_dataset** out);
lse_status lse_dataset_save_csv(const lse_dataset* ds, const char* path,
                                const char* id_column, const char* target_column);
lse_status lse_dataset_rows(const lse_dataset* ds, uint64_t* out);
lse_status lse_dataset_features(const lse_dataset* ds, uint64_t* out);
void lse_dataset_free(lse_dataset* ds);

/* Feature-wise peer split. Both peers keep ids and the target. */
lse_status lse_vertical_split_fraction(const lse_dataset* ds, double fraction, uint64_t seed,
                                       lse_dataset** out_a, lse_dataset** out_b);
/* Explicit disjoint column lists covering every feature. */
lse_status lse_vertical_split_columns(const lse_dataset* ds, const char* const* peer_a_columns,
                                      size_t peer_a_count, const char* const* peer_b_columns,
                                      size_t peer_b_count, lse_dataset** out_a, lse_dataset** out_b);

/* ---- autoencoder ------------------------------------------------------- */

/* Fits a min-max scaler and trains the autoencoder on every row of ds.
 * options_json keys (all optional):
 *   latent_dim (32), encoder_hidden ([128,64,40]), epochs (200),
 *   batch_size (128), learning_rate (0.0001), seed (0),
 *   val_fraction (0; seeded monitoring holdout),
 *   multitask {"lambda": 1.0}  -- requires a target; task comes from ds */
lse_status lse_train_autoencoder(const lse_dataset* ds, const char* options_json, lse_model** out);

lse_status lse_model_save(const lse_model* model, const char* path);
lse_status lse_model_load(const char* path, lse_model** out);
lse_status lse_model_latent_dim(const lse_model* model, uint64_t* out);
void lse_model_free(lse_model* model);

/* Scales ds with the model's bundled scaler (feature names must match) and
 * runs the encoder. */
lse_status lse_model_encode(const lse_model* model, const lse_dataset* ds, const char* source_tag,
                            lse_table** out);

/* ---- embedding tables -------------------------------------------------- */

lse_status lse_table_write(const lse_table* table, const char* path);
lse_status lse_table_read(const char* path, lse_table** out);
lse_status lse_table_write_csv(const lse_table* table, const char* path);
lse_status lse_table_rows(const lse_table* table, uint64_t* out);
lse_status lse_table_dim(const lse_table* table, uint64_t* out);
void lse_table_free(lse_table* table);

/* ID-keyed merge of two embedding files into a CSV. mode: "strict"|"inner". */
lse_status lse_join_tables_csv(const char* path_a, const char* path_b, const char* mode,
                               const char* out_csv_path);

/* ---- exchange ---------------------------------------------------------- */

/* Accepts exactly one transfer session and writes the verified file into
 * output_dir. Blocks until the session completes or fails. */
lse_status lse_exchange_serve(const char* bind_host, uint16_t port, const char* output_dir,
                              int timeout_seconds, char** out_file_path);
lse_status lse_exchange_send(const char* host, uint16_t port, const char* path,
                             int timeout_seconds, uint64_t* out_bytes_sent);

/* ---- downstream learners ----------------------------------------------- */

/* Trains on train_csv and evaluates on it plus eval_csv (when non-NULL).
 * options_json: {"kind","l2","learning_rate","epochs","batch_size","seed"}
 * or {"search": {"n_samples","n_folds","seed"}}. Returns a JSON document of
 * per-file metrics. */
lse_status lse_train_downstream(const char* train_csv, const char* eval_csv, const char* id_column,
                                const char* target_column, const char* task,
                                const char* options_json, char** out_metrics_json);

/* ---- scenarios --------------------------------------------------------- */

lse_status lse_run_scenario(const char* manifest_path, char** out_run_dir);

/* Merges report.json files into one document. format: "text"|"csv"|"json". */
lse_status lse_merge_reports(const char* const* report_json_paths, size_t count,
                             const char* format, char** out_document);

/* ---- verification ------------------------------------------------------ */

/* Backprop vs central finite differences on `networks` random small networks;
 * writes the maximum relative error over every parameter. */
lse_status lse_gradcheck(uint64_t networks, uint64_t seed, double* out_max_rel_error);

#ifdef __cplusplus
}
#endif

#endif /* LSE_C_H */
