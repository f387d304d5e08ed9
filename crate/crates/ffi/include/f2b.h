#ifndef F2B_H
#define F2B_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum F2bBmiCategory {
  F2B_BMI_CATEGORY_UNDERWEIGHT = 0,
  F2B_BMI_CATEGORY_NORMAL = 1,
  F2B_BMI_CATEGORY_OVERWEIGHT = 2,
  F2B_BMI_CATEGORY_MODERATELY_OBESE = 3,
  F2B_BMI_CATEGORY_SEVERELY_OBESE = 4,
  F2B_BMI_CATEGORY_VERY_SEVERELY_OBESE = 5,
} F2bBmiCategory;

typedef enum F2bKernel {
  F2B_KERNEL_LINEAR = 0,
  F2B_KERNEL_RBF = 1,
} F2bKernel;

typedef enum F2bStatus {
  F2B_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or an argument out of range.
   */
  F2B_STATUS_INVALID_ARGUMENT = 1,
  F2B_STATUS_DOMAIN = 2,
  F2B_STATUS_PARSE = 3,
  F2B_STATUS_INTEGRITY = 4,
  F2B_STATUS_FORMAT = 5,
  F2B_STATUS_CORRUPT = 6,
  F2B_STATUS_VALIDATION = 7,
  F2B_STATUS_CONVERGENCE = 8,
  F2B_STATUS_CAPACITY = 9,
  F2B_STATUS_UNDEFINED_CORRELATION = 10,
  F2B_STATUS_IO = 11,
  /**
   * A Rust panic was caught at the boundary.
   */
  F2B_STATUS_INTERNAL = 12,
} F2bStatus;

/**
 * Opaque joined dataset.
 */
typedef struct F2bDataset F2bDataset;

/**
 * Opaque trained model.
 */
typedef struct F2bModel F2bModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a
 * success. Valid until the next call into this library on the same thread.
 */
const char *f2b_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *f2b_version(void);

/**
 * # Safety
 * `out_bmi` must be valid for writes.
 */
enum F2bStatus f2b_compute_bmi(double weight_kg, double height_m, double *out_bmi);

/**
 * # Safety
 * `out_category` must be valid for writes.
 */
enum F2bStatus f2b_categorize(double bmi, enum F2bBmiCategory *out_category);

/**
 * Exact binomial test of `k` successes in `n` trials against `p0`.
 *
 * # Safety
 * Both output pointers must be valid for writes.
 */
enum F2bStatus f2b_binomial_test(uint64_t k,
                                 uint64_t n,
                                 double p0,
                                 double *out_p_one_sided,
                                 double *out_p_two_sided);

/**
 * # Safety
 * `xs` and `ys` must each point to `len` readable doubles.
 */
enum F2bStatus f2b_pearson(const double *xs, const double *ys, size_t len, double *out_r);

/**
 * Loads and joins a metadata CSV and an F2BE embeddings file.
 *
 * # Safety
 * Paths must be NUL-terminated; `out_dataset` must be valid for writes.
 */
enum F2bStatus f2b_dataset_load(const char *metadata_path,
                                const char *embeddings_path,
                                bool normalize,
                                struct F2bDataset **out_dataset);

/**
 * # Safety
 * `dataset` must come from [`f2b_dataset_load`] and not be used afterwards.
 */
void f2b_dataset_free(struct F2bDataset *dataset);

/**
 * Number of records, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t f2b_dataset_len(const struct F2bDataset *dataset);

/**
 * Embedding dimension, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be null or a live handle.
 */
size_t f2b_dataset_dim(const struct F2bDataset *dataset);

/**
 * Trains an epsilon-SVR on the listed record ids, or on every record when
 * `ids` is null. A non-positive `gamma` selects `1/dim` for RBF.
 *
 * # Safety
 * `dataset` must be a live handle; `ids`, if non-null, must point to
 * `n_ids` NUL-terminated strings; `out_model` must be valid for writes.
 */
enum F2bStatus f2b_model_train(const struct F2bDataset *dataset,
                               const char *const *ids,
                               size_t n_ids,
                               enum F2bKernel kernel,
                               double gamma,
                               double c,
                               double epsilon,
                               double tolerance,
                               struct F2bModel **out_model);

/**
 * # Safety
 * `path` must be NUL-terminated; `out_model` must be valid for writes.
 */
enum F2bStatus f2b_model_load(const char *path, struct F2bModel **out_model);

/**
 * # Safety
 * `model` must be a live handle and `path` NUL-terminated.
 */
enum F2bStatus f2b_model_save(const struct F2bModel *model, const char *path);

/**
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void f2b_model_free(struct F2bModel *model);

/**
 * Number of support vectors, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t f2b_model_support_len(const struct F2bModel *model);

/**
 * Predicts from a vector already in the model's feature space.
 *
 * # Safety
 * `x` must point to `len` readable doubles and `out_bmi` be writable.
 */
enum F2bStatus f2b_model_predict(const struct F2bModel *model,
                                 const double *x,
                                 size_t len,
                                 double *out_bmi);

/**
 * Predicts from a raw embedding, normalizing it if the model expects that.
 *
 * # Safety
 * `x` must point to `len` readable floats and `out_bmi` be writable.
 */
enum F2bStatus f2b_model_predict_raw(const struct F2bModel *model,
                                     const float *x,
                                     size_t len,
                                     double *out_bmi);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* F2B_H */
