#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodknn/config.hpp"
#include "oodknn/eval.hpp"
#include "oodknn/scorers.hpp"

namespace oodknn {

/// Name given to the unweighted average row.
inline constexpr std::string_view kMeanRowName = "unweighted-mean";

struct EvalReport {
  std::string id_dataset;
  std::string ood_dataset;
  ScorerConfig method;
  double tpr_level = 0.95;
  double fpr_at_tpr95 = 0.0;
  double auroc = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
  double gamma = 0.0;
};

/// Calibrates on `id` and measures `ood` against it.
EvalReport evaluate(const ScoreVector& id, const ScoreVector& ood,
                    double tpr_level = 0.95);

/// Plain mean of FPR and AUROC across reports; n_ood is the total.
EvalReport unweighted_mean(std::span<const EvalReport> reports);

/// One `key=value ...` line per report.
std::string format_text(std::span<const EvalReport> reports);
/// JSON array with one object per report.
std::string format_json(std::span<const EvalReport> reports);

/// Shortest round-trippable decimal representation.
std::string format_double(double v);

// Score files: `# key=value` header lines (dataset, then the scorer config)
// followed by one score per line.
struct ScoreFile {
  ScoreVector scores;
  /// False when the file carried no `method=` header; scores.config then
  /// holds knn defaults and should not be trusted.
  bool has_config = false;
};

/// `with_config = false` leaves out the scorer config lines.
std::string format_scores(const ScoreVector& scores, bool with_config = true);
ScoreFile parse_scores(std::string_view text,
                       std::string_view source = "<memory>");
void write_scores(const ScoreVector& scores, const std::filesystem::path& path,
                  bool with_config = true);
ScoreFile read_scores(const std::filesystem::path& path);

/// Two-column `bin_left count` text.
std::string format_histogram(const Histogram& hist);

}  // namespace oodknn
