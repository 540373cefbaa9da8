#include "oodknn/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "oodknn/error.hpp"

namespace oodknn {

namespace fs = std::filesystem;

namespace {

constexpr const char* kConfigFile = "scorer.cfg";
constexpr const char* kReferenceFile = "reference.oode";

}  // namespace

Matrix load_entry(const DatasetEntry& entry, Method method) {
  if (method == Method::Msp) {
    if (!entry.logit_path) {
      fail(ErrorKind::Config, "dataset '" + entry.name + "' has no logit file for msp");
    }
    auto logits = read_matrix(*entry.logit_path, MatrixKind::Logits);
    if (logits.kind() != MatrixKind::Logits) {
      fail(ErrorKind::Format, entry.logit_path->string() + ": expected a logit matrix");
    }
    return logits;
  }
  auto embeddings = read_matrix(entry.embedding_path, MatrixKind::Embeddings);
  if (embeddings.kind() != MatrixKind::Embeddings) {
    fail(ErrorKind::Format, entry.embedding_path.string() + ": expected an embedding matrix");
  }
  return l2_normalize(embeddings);
}

FittedModel fit_from_manifest(const DatasetManifest& manifest, const ScorerConfig& config) {
  config.validate();
  FittedModel model{config, std::nullopt, nullptr};
  if (config.method == Method::Msp) {
    model.scorer = fit(config, Matrix(MatrixKind::Logits, 1, 2, {0.0f, 0.0f}));
    return model;
  }
  model.reference = load_entry(manifest.id_train(), config.method);
  model.scorer = fit(config, *model.reference);
  return model;
}

void save_model(const FittedModel& model, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  std::ofstream cfg(dir / kConfigFile, std::ios::trunc);
  if (!cfg) fail(ErrorKind::Io, "cannot write " + (dir / kConfigFile).string());
  cfg << model.config.to_string();
  cfg.close();
  if (!cfg) fail(ErrorKind::Io, "write failed for " + (dir / kConfigFile).string());
  if (model.reference) write_matrix(*model.reference, dir / kReferenceFile);
}

FittedModel load_model(const fs::path& dir) {
  std::ifstream cfg(dir / kConfigFile);
  if (!cfg) fail(ErrorKind::Io, "cannot open " + (dir / kConfigFile).string());
  std::stringstream text;
  text << cfg.rdbuf();
  FittedModel model{ScorerConfig::parse(text.str()), std::nullopt, nullptr};
  if (model.config.method == Method::Msp) {
    model.scorer = fit(model.config, Matrix(MatrixKind::Logits, 1, 2, {0.0f, 0.0f}));
    return model;
  }
  model.reference = read_matrix(dir / kReferenceFile);
  model.scorer = fit(model.config, *model.reference);
  return model;
}

EvalRun run_evaluation(const DatasetManifest& manifest, const ScorerConfig& config,
                       double tpr_level, unsigned workers) {
  if (!(tpr_level > 0.0 && tpr_level <= 1.0)) {
    fail(ErrorKind::Config, "tpr level must be in (0, 1]");
  }
  const auto& id_test = manifest.id_test();
  const auto oods = manifest.ood_tests();
  if (oods.empty()) fail(ErrorKind::Config, "manifest has no ood-test entry");

  const auto model = fit_from_manifest(manifest, config);
  EvalRun run;
  run.scores.push_back(score_batch(*model.scorer, load_entry(id_test, config.method),
                                   id_test.name, workers));
  for (const auto* entry : oods) {
    run.scores.push_back(score_batch(*model.scorer, load_entry(*entry, config.method),
                                     entry->name, workers));
    run.reports.push_back(evaluate(run.scores.front(), run.scores.back(), tpr_level));
  }
  run.reports.push_back(unweighted_mean(run.reports));
  return run;
}

}  // namespace oodknn
