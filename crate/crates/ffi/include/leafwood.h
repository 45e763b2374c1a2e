#ifndef LEAFWOOD_H
#define LEAFWOOD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes. The nonzero library codes match the CLI exit codes.
typedef enum LwStatus {
  LW_STATUS_OK = 0,
  LW_STATUS_CONFIG = 2,
  LW_STATUS_IO = 3,
  LW_STATUS_NUMERIC = 4,
  LW_STATUS_NULL_POINTER = 10,
  LW_STATUS_INVALID_ARGUMENT = 11,
  LW_STATUS_PANIC = 12,
} LwStatus;

// A point cloud plus its cached feature vectors.
typedef struct LwCloud LwCloud;

// A trained classifier.
typedef struct LwModel LwModel;

// Options for [`lw_auto_train`]. Fill with [`lw_train_options_default`].
typedef struct LwTrainOptions {
  size_t k;
  uint64_t seed;
  size_t n_candidates;
  size_t n_leaf;
  size_t n_wood;
  double c;
  double gamma;
  double tol;
  size_t max_iter;
  // Nonzero to standardize features before training.
  uint8_t scaling;
} LwTrainOptions;

// Agreement statistics. Leaf is the positive class.
typedef struct LwMetrics {
  double p_o;
  double kappa_paper;
  double kappa_standard;
  uint64_t tp;
  uint64_t tn;
  uint64_t fp;
  uint64_t fn_;
} LwMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Returns the library version as a static NUL-terminated string.
const char *lw_version(void);

// Message for the last failed call on this thread, or an empty string.
// The pointer stays valid until the next failing call on the same thread.
const char *lw_last_error_message(void);

// Builds a cloud from `n` interleaved x, y, z triples.
//
// # Safety
// `xyz` must point to `3 * n` readable doubles and `out` must be writable.
enum LwStatus lw_cloud_from_xyz(const double *xyz, size_t n, struct LwCloud **out);

// Reads a `.xyz` or ASCII `.ply` cloud.
//
// # Safety
// `path` must be a NUL-terminated string and `out` must be writable.
enum LwStatus lw_cloud_read(const char *path, struct LwCloud **out);

// Number of points in the cloud, 0 for a null handle.
//
// # Safety
// `cloud` must be null or a live handle.
size_t lw_cloud_len(const struct LwCloud *cloud);

// # Safety
// `cloud` must be null or a handle not yet freed.
void lw_cloud_free(struct LwCloud *cloud);

// Computes (and caches) the feature vectors for neighborhood size `k`,
// then copies them into `out` as `n * 5` doubles laid out x, y, z,
// c_lambda, rho per point. `out` may be null to only fill the cache.
//
// # Safety
// `cloud` must be a live handle; `out`, when non-null, must hold `out_len`
// doubles.
enum LwStatus lw_compute_features(struct LwCloud *cloud, size_t k, double *out, size_t out_len);

// Writes the default training options into `out`.
//
// # Safety
// `out` must be writable.
enum LwStatus lw_train_options_default(struct LwTrainOptions *out);

// Selects a training set automatically and trains a model on it.
//
// # Safety
// `cloud` must be a live handle, `opts` readable (or null for defaults)
// and `out` writable.
enum LwStatus lw_auto_train(struct LwCloud *cloud,
                            const struct LwTrainOptions *opts,
                            struct LwModel **out);

// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum LwStatus lw_model_load(const char *path, struct LwModel **out);

// # Safety
// `model` must be a live handle and `path` a NUL-terminated string.
enum LwStatus lw_model_save(const struct LwModel *model, const char *path);

// # Safety
// `model` must be null or a handle not yet freed.
void lw_model_free(struct LwModel *model);

// Classifies every point (features at neighborhood size `k`) and writes
// one label per point into `labels`: 1 leaf, 0 wood.
//
// # Safety
// Handles must be live; `labels` must hold `n` bytes where `n` is the
// cloud size.
enum LwStatus lw_classify(const struct LwModel *model,
                          struct LwCloud *cloud,
                          size_t k,
                          uint8_t *labels,
                          size_t n);

// Decision value of the model at one feature vector (5 doubles). Values
// at or above zero mean leaf.
//
// # Safety
// `features` must hold 5 doubles and `out` be writable.
enum LwStatus lw_decision_value(const struct LwModel *model, const double *features, double *out);

// Compares `n` predicted labels against `n` truth labels (0 wood, 1 leaf).
//
// # Safety
// `pred` and `truth` must hold `n` bytes and `out` must be writable.
enum LwStatus lw_evaluate(const uint8_t *pred,
                          const uint8_t *truth,
                          size_t n,
                          struct LwMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEAFWOOD_H */
