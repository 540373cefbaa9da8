#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace oodknn {

struct DetectionThreshold {
  double gamma = 0.0;
  double tpr_level = 0.95;
  std::size_t n_id = 0;
};

enum class Verdict { Id, Ood };

/// Picks gamma from in-distribution scores alone: the ascending-sorted score
/// at index floor((1 - tpr_level) * n). At least tpr_level of the calibration
/// scores are >= gamma, and gamma is the largest observed score with that
/// property.
DetectionThreshold calibrate(std::span<const double> id_scores,
                             double tpr_level = 0.95);

/// ID iff score >= gamma.
Verdict decide(double score, const DetectionThreshold& threshold) noexcept;

/// Fraction of OOD scores accepted as ID at the threshold calibrated on
/// `id_scores`.
double fpr_at_tpr(std::span<const double> id_scores,
                  std::span<const double> ood_scores, double tpr_level = 0.95);

/// P(id > ood) + P(id == ood) / 2, via the midrank rank-sum identity.
double auroc(std::span<const double> id_scores,
             std::span<const double> ood_scores);

struct Histogram {
  /// n_bins + 1 edges; a degenerate (constant) input yields one bin whose two
  /// edges coincide.
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max]; the maximum falls into the last bin.
Histogram score_histogram(std::span<const double> scores, std::size_t n_bins);

}  // namespace oodknn
