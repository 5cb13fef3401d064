#ifndef TRANSBOX_H
#define TRANSBOX_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum TbStatus {
  TB_STATUS_OK = 0,
  TB_STATUS_NULL_POINTER = 1,
  TB_STATUS_INVALID_UTF8 = 2,
  TB_STATUS_PARSE = 3,
  TB_STATUS_IO = 4,
  TB_STATUS_CONFIG = 5,
  TB_STATUS_TRAIN = 6,
  TB_STATUS_MODEL = 7,
  TB_STATUS_CHECKPOINT = 8,
  TB_STATUS_PANIC = 9,
} TbStatus;

/**
 * Trained or loaded model with its training metadata.
 */
typedef struct TbModel TbModel;

/**
 * Parsed ontology.
 */
typedef struct TbOntology TbOntology;

/**
 * Training settings. Obtain defaults with [`tb_train_config_default`].
 */
typedef struct TbTrainConfig {
  size_t dim;
  double margin;
  double lambda;
  double learning_rate;
  size_t epochs;
  size_t batch_size;
  size_t negatives;
  uint64_t seed;
  bool semantic_enhancement;
  size_t threads;
} TbTrainConfig;

/**
 * Message for the last failed call on this thread, or NULL after a
 * successful one. The pointer stays valid until the next call into this
 * library from the same thread.
 */
const char *tb_last_error_message(void);

/**
 * Parses an ontology from NUL-terminated text.
 *
 * # Safety
 * `text` must be a valid C string and `out` a valid pointer.
 */
enum TbStatus tb_ontology_parse(const char *text, struct TbOntology **out);

/**
 * Number of axioms in `ontology`, 0 for NULL.
 *
 * # Safety
 * `ontology` must be NULL or a live handle.
 */
size_t tb_ontology_axiom_count(const struct TbOntology *ontology);

/**
 * # Safety
 * `ontology` must be NULL or a handle not yet freed.
 */
void tb_ontology_free(struct TbOntology *ontology);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum TbStatus tb_train_config_default(struct TbTrainConfig *out);

/**
 * Trains a model on `ontology`.
 *
 * # Safety
 * Pointers must be valid; `ontology` must be a live handle.
 */
enum TbStatus tb_train(const struct TbOntology *ontology,
                       const struct TbTrainConfig *config,
                       struct TbModel **out);

/**
 * # Safety
 * `path` must be a valid C string and `out` a valid pointer.
 */
enum TbStatus tb_model_load(const char *path, struct TbModel **out);

/**
 * # Safety
 * `model` must be a live handle and `path` a valid C string.
 */
enum TbStatus tb_model_save(const struct TbModel *model, const char *path);

/**
 * Embedding dimension, 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t tb_model_dim(const struct TbModel *model);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void tb_model_free(struct TbModel *model);

/**
 * Checks every axiom of `ontology` against `model` at tolerance `tol`.
 * `violations` may be NULL.
 *
 * # Safety
 * Handles must be live and `sound` a valid pointer.
 */
enum TbStatus tb_check(const struct TbModel *model,
                       const struct TbOntology *ontology,
                       double tol,
                       bool *sound,
                       size_t *violations);

/**
 * Mean inclusion loss of the axioms of `ontology` with margin `gamma`.
 *
 * # Safety
 * Handles must be live and `out` a valid pointer.
 */
enum TbStatus tb_mean_axiom_loss(const struct TbModel *model,
                                 const struct TbOntology *ontology,
                                 double gamma,
                                 double *out);

/**
 * Plausibility score of `lhs ⊑ rhs`, both given as concept expressions;
 * higher is more plausible and 0 is the maximum.
 *
 * # Safety
 * `model` must be a live handle, `lhs` and `rhs` valid C strings and `out`
 * a valid pointer.
 */
enum TbStatus tb_score(const struct TbModel *model, const char *lhs, const char *rhs, double *out);

#endif  /* TRANSBOX_H */
