#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "oodknn/config.hpp"
#include "oodknn/report.hpp"
#include "oodknn/scorers.hpp"
#include "oodknn/store.hpp"

namespace oodknn {

/// Loads the matrix a method consumes for one manifest entry: the normalized
/// embeddings, or the logits for MSP.
Matrix load_entry(const DatasetEntry& entry, Method method);

struct FittedModel {
  ScorerConfig config;
  /// Normalized training embeddings; absent for MSP.
  std::optional<Matrix> reference;
  std::shared_ptr<const Scorer> scorer;
};

FittedModel fit_from_manifest(const DatasetManifest& manifest,
                              const ScorerConfig& config);

/// Model directory layout: `scorer.cfg` (config block) and, for embedding
/// methods, `reference.oode`. Fitting is deterministic, so loading refits
/// from the stored reference.
void save_model(const FittedModel& model, const std::filesystem::path& dir);
FittedModel load_model(const std::filesystem::path& dir);

struct EvalRun {
  /// One report per ood-test entry, in manifest order, then the mean row.
  std::vector<EvalReport> reports;
  /// id-test scores first, then each ood-test entry.
  std::vector<ScoreVector> scores;
};

/// Fits on id-train, calibrates on id-test and reports every ood-test entry.
EvalRun run_evaluation(const DatasetManifest& manifest,
                       const ScorerConfig& config, double tpr_level,
                       unsigned workers = 0);

}  // namespace oodknn
