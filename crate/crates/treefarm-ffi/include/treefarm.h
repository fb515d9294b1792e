#ifndef TREEFARM_H
#define TREEFARM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Node- vs attribute-granularity decision rule.
 */
typedef enum {
  TF_COST_MODEL_ALPHA = 0,
  TF_COST_MODEL_N_LOG_N = 1,
  TF_COST_MODEL_N_SQUARED = 2,
} TfCostModel;

/**
 * Task-to-worker scheduling policy.
 */
typedef enum {
  TF_SCHEDULER_DRR = 0,
  TF_SCHEDULER_ON_DEMAND = 1,
  TF_SCHEDULER_WEIGHTED = 2,
} TfScheduler;

/**
 * Result of every fallible call.
 */
typedef enum {
  TF_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  TF_STATUS_NULL_ARG = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  TF_STATUS_UTF8 = 2,
  /**
   * A file could not be read.
   */
  TF_STATUS_IO = 3,
  /**
   * Schema or data text failed to parse.
   */
  TF_STATUS_PARSE = 4,
  /**
   * Invalid build configuration.
   */
  TF_STATUS_CONFIG = 5,
  /**
   * Tree growth failed.
   */
  TF_STATUS_BUILD = 6,
  /**
   * A panic was caught at the boundary.
   */
  TF_STATUS_PANIC = 7,
} TfStatus;

/**
 * Tree-growth strategy.
 */
typedef enum {
  TF_STRATEGY_SEQ = 0,
  TF_STRATEGY_NP = 1,
  TF_STRATEGY_NAP = 2,
} TfStrategy;

/**
 * Opaque loaded training set.
 */
typedef struct TfDataset TfDataset;

/**
 * Opaque trained tree: rendered text plus size statistics.
 */
typedef struct TfTree TfTree;

/**
 * All knobs of one training run. Obtain defaults from
 * `tf_build_options_default` and override fields as needed.
 */
typedef struct {
  TfStrategy strategy;
  uintptr_t workers;
  TfScheduler scheduler;
  uintptr_t qsize;
  TfCostModel cost_model;
  uint64_t alpha;
  double min_cases;
  bool counting_sort;
} TfBuildOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread, or null.
 * The pointer stays valid until the next failing call on the thread.
 */
const char *tf_last_error_message(void);

/**
 * Parses schema and CSV text into a dataset handle.
 *
 * # Safety
 * `schema_text` and `csv_text` must be NUL-terminated strings; `out` must
 * point to writable storage for one pointer.
 */
TfStatus tf_dataset_from_text(const char *schema_text, const char *csv_text, TfDataset **out);

/**
 * Reads schema and CSV files into a dataset handle.
 *
 * # Safety
 * `schema_path` and `data_path` must be NUL-terminated strings; `out` must
 * point to writable storage for one pointer.
 */
TfStatus tf_dataset_load(const char *schema_path, const char *data_path, TfDataset **out);

/**
 * Number of cases, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be a live handle from this library or null.
 */
uintptr_t tf_dataset_case_count(const TfDataset *dataset);

/**
 * Number of attributes, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be a live handle from this library or null.
 */
uintptr_t tf_dataset_attribute_count(const TfDataset *dataset);

/**
 * Number of class labels, or 0 for a null handle.
 *
 * # Safety
 * `dataset` must be a live handle from this library or null.
 */
uintptr_t tf_dataset_class_count(const TfDataset *dataset);

/**
 * Releases a dataset handle. Null is allowed.
 *
 * # Safety
 * `dataset` must be a live handle from this library or null.
 */
void tf_dataset_free(TfDataset *dataset);

/**
 * Defaults: sequential strategy, 3 workers, weighted scheduling, queue
 * capacity 4096, |T| < c·r² cost model with alpha 1000, min-cases 2.
 */
TfBuildOptions tf_build_options_default(void);

/**
 * Trains a tree on the dataset. `options` may be null for defaults.
 *
 * # Safety
 * `dataset` must be a live handle; `options` must be null or valid; `out`
 * must point to writable storage for one pointer.
 */
TfStatus tf_train(const TfDataset *dataset, const TfBuildOptions *options, TfTree **out);

/**
 * Total node count, or 0 for a null handle.
 *
 * # Safety
 * `tree` must be a live handle from this library or null.
 */
uintptr_t tf_tree_node_count(const TfTree *tree);

/**
 * Leaf count, or 0 for a null handle.
 *
 * # Safety
 * `tree` must be a live handle from this library or null.
 */
uintptr_t tf_tree_leaf_count(const TfTree *tree);

/**
 * Number of levels (a lone leaf has depth 1), or 0 for a null handle.
 *
 * # Safety
 * `tree` must be a live handle from this library or null.
 */
uintptr_t tf_tree_depth(const TfTree *tree);

/**
 * Copies the tree text (one node per line) into a fresh string owned by
 * the caller; release it with `tf_string_free`.
 *
 * # Safety
 * `tree` must be a live handle; `out` must point to writable storage for
 * one pointer.
 */
TfStatus tf_tree_render(const TfTree *tree, char **out);

/**
 * Releases a tree handle. Null is allowed.
 *
 * # Safety
 * `tree` must be a live handle from this library or null.
 */
void tf_tree_free(TfTree *tree);

/**
 * Releases a string returned by this library. Null is allowed.
 *
 * # Safety
 * `s` must have been returned by this library or be null.
 */
void tf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TREEFARM_H */
