/* C interface to the oodknn out-of-distribution detection library.
 *
 * Every object is an opaque handle created by a *_create/_read/_fit/_load
 * function and released with the matching *_free function. Functions that
 * can fail return an ood_status; on failure ood_last_error() describes the
 * problem for the calling thread. Strings returned by accessors are owned by
 * the handle and stay valid until it is freed.
 */
#ifndef OODKNN_H
#define OODKNN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(OODKNN_BUILDING)
#    define OOD_API __declspec(dllexport)
#  else
#    define OOD_API __declspec(dllimport)
#  endif
#else
#  define OOD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ood_status {
  OOD_OK = 0,
  OOD_ERR_CONFIG = 1,
  OOD_ERR_IO = 2,
  OOD_ERR_FORMAT = 3,
  OOD_ERR_CORRUPT = 4,
  OOD_ERR_VALIDATION = 5,
  OOD_ERR_SHAPE = 6,
  OOD_ERR_INPUT = 7,
  OOD_ERR_INTERNAL = 8
} ood_status;

typedef enum ood_matrix_kind {
  OOD_EMBEDDINGS = 0,
  OOD_LOGITS = 1
} ood_matrix_kind;

typedef enum ood_method {
  OOD_KNN = 0,
  OOD_MSP = 1,
  OOD_LOF = 2,
  OOD_PCA = 3,
  OOD_IFOREST = 4,
  OOD_LODA = 5
} ood_method;

typedef enum ood_verdict { OOD_VERDICT_ID = 0, OOD_VERDICT_OOD = 1 } ood_verdict;

typedef enum ood_role {
  OOD_ROLE_ID_TRAIN = 0,
  OOD_ROLE_ID_TEST = 1,
  OOD_ROLE_OOD_TEST = 2
} ood_role;

typedef struct ood_matrix ood_matrix;
typedef struct ood_manifest ood_manifest;
typedef struct ood_knn_index ood_knn_index;
typedef struct ood_scorer ood_scorer;
typedef struct ood_scores ood_scores;
typedef struct ood_eval ood_eval;

typedef struct ood_scorer_config {
  ood_method method;
  uint64_t k;
  uint64_t n_components;
  uint64_t n_estimators;
  uint64_t subsample;
  uint64_t n_bins;
  uint64_t n_projections;
  uint64_t seed;
} ood_scorer_config;

typedef struct ood_threshold {
  double gamma;
  double tpr_level;
  uint64_t n_id;
} ood_threshold;

typedef struct ood_dataset_entry {
  ood_role role;
  const char* name;
  const char* embedding_path;
  const char* logit_path; /* NULL when absent */
} ood_dataset_entry;

typedef struct ood_report {
  const char* id_dataset;
  const char* ood_dataset;
  const char* method; /* flat key=value config */
  double tpr_level;
  double fpr_at_tpr95;
  double auroc;
  uint64_t n_id;
  uint64_t n_ood;
  double gamma;
} ood_report;

OOD_API const char* ood_last_error(void);
OOD_API const char* ood_status_name(ood_status status);

/* Matrices */
OOD_API ood_status ood_matrix_create(ood_matrix_kind kind, uint64_t rows, uint32_t cols,
                                     const float* data, ood_matrix** out);
/* `csv_kind` tags matrices read from .csv files. */
OOD_API ood_status ood_matrix_read(const char* path, ood_matrix_kind csv_kind,
                                   ood_matrix** out);
OOD_API ood_status ood_matrix_write(const ood_matrix* m, const char* path);
OOD_API ood_status ood_matrix_normalize(const ood_matrix* m, ood_matrix** out);
OOD_API uint64_t ood_matrix_rows(const ood_matrix* m);
OOD_API uint32_t ood_matrix_cols(const ood_matrix* m);
OOD_API ood_matrix_kind ood_matrix_get_kind(const ood_matrix* m);
OOD_API int ood_matrix_is_normalized(const ood_matrix* m);
OOD_API const float* ood_matrix_data(const ood_matrix* m);
OOD_API void ood_matrix_free(ood_matrix* m);

/* Dataset manifests */
OOD_API ood_status ood_manifest_load(const char* path, ood_manifest** out);
OOD_API size_t ood_manifest_size(const ood_manifest* m);
OOD_API ood_status ood_manifest_entry(const ood_manifest* m, size_t i,
                                      ood_dataset_entry* out);
OOD_API void ood_manifest_free(ood_manifest* m);

/* Scorer configuration */
OOD_API ood_status ood_method_from_name(const char* name, ood_method* out);
OOD_API const char* ood_method_name(ood_method method);
OOD_API ood_status ood_config_default(ood_method method, ood_scorer_config* out);
OOD_API ood_status ood_config_parse(const char* text, ood_scorer_config* out);
/* Writes the flat key=value block (NUL-terminated) into buf when it fits;
 * *needed receives the required size including the terminator. */
OOD_API ood_status ood_config_format(const ood_scorer_config* config, char* buf,
                                     size_t capacity, size_t* needed);

/* Exact k-nearest-neighbor search */
OOD_API ood_status ood_knn_build(const ood_matrix* train, uint64_t k_max,
                                 ood_knn_index** out);
OOD_API ood_status ood_knn_query(const ood_knn_index* index, const float* q, size_t dim,
                                 uint64_t k, double* distances, uint64_t* indices);
/* `n_queries` rows of `dim` floats; outputs hold n_queries * k entries. */
OOD_API ood_status ood_knn_batch_query(const ood_knn_index* index, const float* queries,
                                       size_t n_queries, size_t dim, uint64_t k,
                                       unsigned workers, double* distances,
                                       uint64_t* indices);
OOD_API void ood_knn_free(ood_knn_index* index);

/* Scorers */
OOD_API ood_status ood_scorer_fit(const ood_scorer_config* config, const ood_matrix* train,
                                  ood_scorer** out);
/* Model directory written by ood_model_save / read by ood_model_load. */
OOD_API ood_status ood_model_fit_manifest(const ood_manifest* manifest,
                                          const ood_scorer_config* config,
                                          const char* dir);
OOD_API ood_status ood_model_load(const char* dir, ood_scorer** out);
OOD_API ood_status ood_scorer_config_get(const ood_scorer* s, ood_scorer_config* out);
OOD_API uint32_t ood_scorer_dims(const ood_scorer* s);
OOD_API ood_matrix_kind ood_scorer_input_kind(const ood_scorer* s);
OOD_API ood_status ood_scorer_score_one(const ood_scorer* s, const float* x, size_t n,
                                        double* out);
/* Embedding inputs to embedding scorers are L2-normalized first when
 * `normalize` is nonzero. */
OOD_API ood_status ood_scorer_score(const ood_scorer* s, const ood_matrix* data,
                                    const char* dataset, int normalize, unsigned workers,
                                    ood_scores** out);
OOD_API void ood_scorer_free(ood_scorer* s);

/* Score vectors and score files */
OOD_API ood_status ood_scores_create(const double* scores, size_t n, const char* dataset,
                                     ood_scores** out);
OOD_API ood_status ood_scores_read(const char* path, ood_scores** out);
OOD_API ood_status ood_scores_write(const ood_scores* s, const char* path);
OOD_API const char* ood_scores_text(const ood_scores* s);
OOD_API size_t ood_scores_size(const ood_scores* s);
OOD_API const double* ood_scores_data(const ood_scores* s);
OOD_API const char* ood_scores_dataset(const ood_scores* s);
/* Nonzero when the scores carry a scorer config; *out is filled then. */
OOD_API int ood_scores_config(const ood_scores* s, ood_scorer_config* out);
OOD_API void ood_scores_free(ood_scores* s);

/* Calibration and metrics */
OOD_API ood_status ood_calibrate(const double* id_scores, size_t n, double tpr_level,
                                 ood_threshold* out);
OOD_API ood_verdict ood_decide(double score, const ood_threshold* threshold);
OOD_API ood_status ood_fpr_at_tpr(const double* id_scores, size_t n_id,
                                  const double* ood_scores, size_t n_ood,
                                  double tpr_level, double* out);
OOD_API ood_status ood_auroc(const double* id_scores, size_t n_id,
                             const double* ood_scores, size_t n_ood, double* out);
/* `left_edges` and `counts` need room for n_bins entries; *used receives the
 * number of bins produced (1 for constant input). */
OOD_API ood_status ood_histogram(const double* scores, size_t n, size_t n_bins,
                                 double* left_edges, uint64_t* counts, size_t* used);

/* Full evaluation over a manifest */
OOD_API ood_status ood_eval_run(const ood_manifest* manifest, const ood_scorer_config* config,
                                double tpr_level, unsigned workers, ood_eval** out);
/* Reports: one per ood-test entry, then the unweighted mean row. */
OOD_API size_t ood_eval_report_count(const ood_eval* e);
OOD_API ood_status ood_eval_report(const ood_eval* e, size_t i, ood_report* out);
OOD_API const char* ood_eval_text(const ood_eval* e);
OOD_API const char* ood_eval_json(const ood_eval* e);
/* Scores: id-test first, then each ood-test entry. Borrowed from `e`. */
OOD_API size_t ood_eval_scores_count(const ood_eval* e);
OOD_API const ood_scores* ood_eval_scores(const ood_eval* e, size_t i);
OOD_API void ood_eval_free(ood_eval* e);

#ifdef __cplusplus
}
#endif

#endif /* OODKNN_H */
