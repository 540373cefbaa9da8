#include "oodknn/oodknn.h"

#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "oodknn/error.hpp"
#include "oodknn/eval.hpp"
#include "oodknn/knn.hpp"
#include "oodknn/pipeline.hpp"
#include "oodknn/report.hpp"
#include "oodknn/scorers.hpp"
#include "oodknn/store.hpp"

using namespace oodknn;

struct ood_matrix {
  Matrix value;
};

struct ood_manifest {
  DatasetManifest value;
  std::vector<std::string> paths;  // embedding, logit per entry
};

struct ood_knn_index {
  KnnIndex value;
};

struct ood_scorer {
  std::shared_ptr<const Scorer> value;
};

struct ood_scores {
  ScoreVector value;
  bool has_config = false;
  mutable std::optional<std::string> text;
};

struct ood_eval {
  std::vector<EvalReport> reports;
  std::vector<std::string> methods;
  std::vector<ood_scores> scores;
  std::string text;
  std::string json;
};

namespace {

thread_local std::string last_error;

ood_status to_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return OOD_ERR_CONFIG;
    case ErrorKind::Io: return OOD_ERR_IO;
    case ErrorKind::Format: return OOD_ERR_FORMAT;
    case ErrorKind::Corruption: return OOD_ERR_CORRUPT;
    case ErrorKind::Validation: return OOD_ERR_VALIDATION;
    case ErrorKind::Shape: return OOD_ERR_SHAPE;
    case ErrorKind::Input: return OOD_ERR_INPUT;
  }
  return OOD_ERR_INTERNAL;
}

template <typename F>
ood_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return OOD_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return OOD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return OOD_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorKind::Config, std::string(what) + " must not be NULL");
}

ScorerConfig from_c(const ood_scorer_config& c) {
  ScorerConfig out;
  out.method = static_cast<Method>(c.method);
  out.k = c.k;
  out.n_components = c.n_components;
  out.n_estimators = c.n_estimators;
  out.subsample = c.subsample;
  out.n_bins = c.n_bins;
  out.n_projections = c.n_projections;
  out.seed = c.seed;
  return out;
}

ood_scorer_config to_c(const ScorerConfig& c) {
  return {static_cast<ood_method>(c.method), c.k, c.n_components, c.n_estimators,
          c.subsample, c.n_bins, c.n_projections, c.seed};
}

ScorerConfig checked_config(const ood_scorer_config* c) {
  require(c, "config");
  if (c->method < OOD_KNN || c->method > OOD_LODA) {
    fail(ErrorKind::Config, "unknown method id " + std::to_string(c->method));
  }
  return from_c(*c);
}

}  // namespace

extern "C" {

const char* ood_last_error(void) { return last_error.c_str(); }

const char* ood_status_name(ood_status status) {
  switch (status) {
    case OOD_OK: return "ok";
    case OOD_ERR_CONFIG: return "config";
    case OOD_ERR_IO: return "io";
    case OOD_ERR_FORMAT: return "format";
    case OOD_ERR_CORRUPT: return "corruption";
    case OOD_ERR_VALIDATION: return "validation";
    case OOD_ERR_SHAPE: return "shape";
    case OOD_ERR_INPUT: return "input";
    case OOD_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

// Matrices -------------------------------------------------------------------

ood_status ood_matrix_create(ood_matrix_kind kind, uint64_t rows, uint32_t cols,
                             const float* data, ood_matrix** out) {
  return guarded([&] {
    require(out, "out");
    std::vector<float> values;
    if (rows * cols > 0) {
      require(data, "data");
      values.assign(data, data + rows * cols);
    }
    *out = new ood_matrix{Matrix(static_cast<MatrixKind>(kind), rows, cols, std::move(values))};
  });
}

ood_status ood_matrix_read(const char* path, ood_matrix_kind csv_kind, ood_matrix** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ood_matrix{read_matrix(path, static_cast<MatrixKind>(csv_kind))};
  });
}

ood_status ood_matrix_write(const ood_matrix* m, const char* path) {
  return guarded([&] {
    require(m, "matrix");
    require(path, "path");
    write_matrix(m->value, path);
  });
}

ood_status ood_matrix_normalize(const ood_matrix* m, ood_matrix** out) {
  return guarded([&] {
    require(m, "matrix");
    require(out, "out");
    *out = new ood_matrix{l2_normalize(m->value)};
  });
}

uint64_t ood_matrix_rows(const ood_matrix* m) { return m ? m->value.rows() : 0; }
uint32_t ood_matrix_cols(const ood_matrix* m) {
  return m ? static_cast<uint32_t>(m->value.cols()) : 0;
}
ood_matrix_kind ood_matrix_get_kind(const ood_matrix* m) {
  return m ? static_cast<ood_matrix_kind>(m->value.kind()) : OOD_EMBEDDINGS;
}
int ood_matrix_is_normalized(const ood_matrix* m) { return m && m->value.normalized(); }
const float* ood_matrix_data(const ood_matrix* m) {
  return m ? m->value.data().data() : nullptr;
}
void ood_matrix_free(ood_matrix* m) { delete m; }

// Manifests ------------------------------------------------------------------

ood_status ood_manifest_load(const char* path, ood_manifest** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto manifest = std::make_unique<ood_manifest>(
        ood_manifest{DatasetManifest::load(path), {}});
    for (const auto& e : manifest->value.entries()) {
      manifest->paths.push_back(e.embedding_path.string());
      manifest->paths.push_back(e.logit_path ? e.logit_path->string() : std::string());
    }
    *out = manifest.release();
  });
}

size_t ood_manifest_size(const ood_manifest* m) { return m ? m->value.entries().size() : 0; }

ood_status ood_manifest_entry(const ood_manifest* m, size_t i, ood_dataset_entry* out) {
  return guarded([&] {
    require(m, "manifest");
    require(out, "out");
    if (i >= m->value.entries().size()) fail(ErrorKind::Config, "manifest index out of range");
    const auto& e = m->value.entries()[i];
    out->role = static_cast<ood_role>(e.role);
    out->name = e.name.c_str();
    out->embedding_path = m->paths[2 * i].c_str();
    out->logit_path = e.logit_path ? m->paths[2 * i + 1].c_str() : nullptr;
  });
}

void ood_manifest_free(ood_manifest* m) { delete m; }

// Config ---------------------------------------------------------------------

ood_status ood_method_from_name(const char* name, ood_method* out) {
  return guarded([&] {
    require(name, "name");
    require(out, "out");
    *out = static_cast<ood_method>(parse_method(name));
  });
}

const char* ood_method_name(ood_method method) {
  if (method < OOD_KNN || method > OOD_LODA) return "unknown";
  return method_name(static_cast<Method>(method)).data();
}

ood_status ood_config_default(ood_method method, ood_scorer_config* out) {
  return guarded([&] {
    require(out, "out");
    if (method < OOD_KNN || method > OOD_LODA) fail(ErrorKind::Config, "unknown method id");
    *out = to_c(ScorerConfig::defaults(static_cast<Method>(method)));
  });
}

ood_status ood_config_parse(const char* text, ood_scorer_config* out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = to_c(ScorerConfig::parse(text));
  });
}

ood_status ood_config_format(const ood_scorer_config* config, char* buf, size_t capacity,
                             size_t* needed) {
  return guarded([&] {
    const auto text = checked_config(config).to_string();
    if (needed) *needed = text.size() + 1;
    if (buf && capacity >= text.size() + 1) std::memcpy(buf, text.c_str(), text.size() + 1);
  });
}

// kNN ------------------------------------------------------------------------

ood_status ood_knn_build(const ood_matrix* train, uint64_t k_max, ood_knn_index** out) {
  return guarded([&] {
    require(train, "train");
    require(out, "out");
    *out = new ood_knn_index{build_index(train->value, k_max)};
  });
}

ood_status ood_knn_query(const ood_knn_index* index, const float* q, size_t dim, uint64_t k,
                         double* distances, uint64_t* indices) {
  return guarded([&] {
    require(index, "index");
    require(q, "query");
    require(distances, "distances");
    require(indices, "indices");
    const auto nb = index->value.query({q, dim}, k);
    for (size_t j = 0; j < nb.size(); ++j) {
      distances[j] = nb.distances[j];
      indices[j] = nb.indices[j];
    }
  });
}

ood_status ood_knn_batch_query(const ood_knn_index* index, const float* queries,
                               size_t n_queries, size_t dim, uint64_t k, unsigned workers,
                               double* distances, uint64_t* indices) {
  return guarded([&] {
    require(index, "index");
    if (n_queries == 0) return;
    require(queries, "queries");
    require(distances, "distances");
    require(indices, "indices");
    if (dim != index->value.dims()) {
      fail(ErrorKind::Shape, "queries have dimension " + std::to_string(dim) +
                                 ", index expects " + std::to_string(index->value.dims()));
    }
    const auto lists = index->value.batch_query({queries, n_queries * dim}, k, workers);
    for (size_t i = 0; i < lists.size(); ++i) {
      for (size_t j = 0; j < k; ++j) {
        distances[i * k + j] = lists[i].distances[j];
        indices[i * k + j] = lists[i].indices[j];
      }
    }
  });
}

void ood_knn_free(ood_knn_index* index) { delete index; }

// Scorers --------------------------------------------------------------------

ood_status ood_scorer_fit(const ood_scorer_config* config, const ood_matrix* train,
                          ood_scorer** out) {
  return guarded([&] {
    const auto cfg = checked_config(config);
    require(out, "out");
    if (cfg.method != Method::Msp) require(train, "train");
    const Matrix placeholder(MatrixKind::Logits, 1, 2, {0.0f, 0.0f});
    *out = new ood_scorer{fit(cfg, train ? train->value : placeholder)};
  });
}

ood_status ood_model_fit_manifest(const ood_manifest* manifest,
                                  const ood_scorer_config* config, const char* dir) {
  return guarded([&] {
    require(manifest, "manifest");
    require(dir, "dir");
    save_model(fit_from_manifest(manifest->value, checked_config(config)), dir);
  });
}

ood_status ood_model_load(const char* dir, ood_scorer** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new ood_scorer{load_model(dir).scorer};
  });
}

ood_status ood_scorer_config_get(const ood_scorer* s, ood_scorer_config* out) {
  return guarded([&] {
    require(s, "scorer");
    require(out, "out");
    *out = to_c(s->value->config());
  });
}

uint32_t ood_scorer_dims(const ood_scorer* s) {
  return s ? static_cast<uint32_t>(s->value->dims()) : 0;
}

ood_matrix_kind ood_scorer_input_kind(const ood_scorer* s) {
  return s ? static_cast<ood_matrix_kind>(s->value->input_kind()) : OOD_EMBEDDINGS;
}

ood_status ood_scorer_score_one(const ood_scorer* s, const float* x, size_t n, double* out) {
  return guarded([&] {
    require(s, "scorer");
    require(x, "x");
    require(out, "out");
    *out = s->value->score({x, n});
  });
}

ood_status ood_scorer_score(const ood_scorer* s, const ood_matrix* data, const char* dataset,
                            int normalize, unsigned workers, ood_scores** out) {
  return guarded([&] {
    require(s, "scorer");
    require(data, "data");
    require(out, "out");
    const std::string name = dataset ? dataset : "";
    const Scorer& scorer = *s->value;
    ScoreVector scores =
        normalize && data->value.kind() == MatrixKind::Embeddings &&
                scorer.input_kind() == MatrixKind::Embeddings
            ? score_batch(scorer, l2_normalize(data->value), name, workers)
            : score_batch(scorer, data->value, name, workers);
    *out = new ood_scores{std::move(scores), true, std::nullopt};
  });
}

void ood_scorer_free(ood_scorer* s) { delete s; }

// Scores ---------------------------------------------------------------------

ood_status ood_scores_create(const double* scores, size_t n, const char* dataset,
                             ood_scores** out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(scores, "scores");
    ScoreVector v;
    if (n > 0) v.scores.assign(scores, scores + n);
    v.dataset = dataset ? dataset : "";
    *out = new ood_scores{std::move(v), false, std::nullopt};
  });
}

ood_status ood_scores_read(const char* path, ood_scores** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto file = read_scores(path);
    *out = new ood_scores{std::move(file.scores), file.has_config, std::nullopt};
  });
}

ood_status ood_scores_write(const ood_scores* s, const char* path) {
  return guarded([&] {
    require(s, "scores");
    require(path, "path");
    write_scores(s->value, path, s->has_config);
  });
}

const char* ood_scores_text(const ood_scores* s) {
  if (!s) return "";
  if (!s->text) s->text = format_scores(s->value, s->has_config);
  return s->text->c_str();
}

size_t ood_scores_size(const ood_scores* s) { return s ? s->value.scores.size() : 0; }
const double* ood_scores_data(const ood_scores* s) {
  return s ? s->value.scores.data() : nullptr;
}
const char* ood_scores_dataset(const ood_scores* s) {
  return s ? s->value.dataset.c_str() : "";
}
int ood_scores_config(const ood_scores* s, ood_scorer_config* out) {
  if (!s || !s->has_config) return 0;
  if (out) *out = to_c(s->value.config);
  return 1;
}
void ood_scores_free(ood_scores* s) { delete s; }

// Metrics --------------------------------------------------------------------

ood_status ood_calibrate(const double* id_scores, size_t n, double tpr_level,
                         ood_threshold* out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(id_scores, "id_scores");
    const auto t = calibrate({id_scores, n}, tpr_level);
    *out = {t.gamma, t.tpr_level, t.n_id};
  });
}

ood_verdict ood_decide(double score, const ood_threshold* threshold) {
  if (!threshold) return OOD_VERDICT_OOD;
  const DetectionThreshold t{threshold->gamma, threshold->tpr_level, threshold->n_id};
  return decide(score, t) == Verdict::Id ? OOD_VERDICT_ID : OOD_VERDICT_OOD;
}

ood_status ood_fpr_at_tpr(const double* id_scores, size_t n_id, const double* ood_scores,
                          size_t n_ood, double tpr_level, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = fpr_at_tpr({id_scores, n_id}, {ood_scores, n_ood}, tpr_level);
  });
}

ood_status ood_auroc(const double* id_scores, size_t n_id, const double* ood_scores,
                     size_t n_ood, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = auroc({id_scores, n_id}, {ood_scores, n_ood});
  });
}

ood_status ood_histogram(const double* scores, size_t n, size_t n_bins, double* left_edges,
                         uint64_t* counts, size_t* used) {
  return guarded([&] {
    require(left_edges, "left_edges");
    require(counts, "counts");
    require(used, "used");
    const auto h = score_histogram({scores, n}, n_bins);
    for (size_t i = 0; i < h.counts.size(); ++i) {
      left_edges[i] = h.edges[i];
      counts[i] = h.counts[i];
    }
    *used = h.counts.size();
  });
}

// Evaluation -----------------------------------------------------------------

ood_status ood_eval_run(const ood_manifest* manifest, const ood_scorer_config* config,
                        double tpr_level, unsigned workers, ood_eval** out) {
  return guarded([&] {
    require(manifest, "manifest");
    require(out, "out");
    auto run = run_evaluation(manifest->value, checked_config(config), tpr_level, workers);
    auto e = std::make_unique<ood_eval>();
    e->text = format_text(run.reports);
    e->json = format_json(run.reports);
    for (const auto& r : run.reports) e->methods.push_back(r.method.to_inline_string());
    e->reports = std::move(run.reports);
    for (auto& s : run.scores) e->scores.push_back({std::move(s), true, std::nullopt});
    *out = e.release();
  });
}

size_t ood_eval_report_count(const ood_eval* e) { return e ? e->reports.size() : 0; }

ood_status ood_eval_report(const ood_eval* e, size_t i, ood_report* out) {
  return guarded([&] {
    require(e, "eval");
    require(out, "out");
    if (i >= e->reports.size()) fail(ErrorKind::Config, "report index out of range");
    const auto& r = e->reports[i];
    *out = {r.id_dataset.c_str(), r.ood_dataset.c_str(), e->methods[i].c_str(),
            r.tpr_level, r.fpr_at_tpr95, r.auroc, r.n_id, r.n_ood, r.gamma};
  });
}

const char* ood_eval_text(const ood_eval* e) { return e ? e->text.c_str() : ""; }
const char* ood_eval_json(const ood_eval* e) { return e ? e->json.c_str() : ""; }
size_t ood_eval_scores_count(const ood_eval* e) { return e ? e->scores.size() : 0; }
const ood_scores* ood_eval_scores(const ood_eval* e, size_t i) {
  return e && i < e->scores.size() ? &e->scores[i] : nullptr;
}
void ood_eval_free(ood_eval* e) { delete e; }

}  // extern "C"
