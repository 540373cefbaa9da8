#include "oodknn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "oodknn/error.hpp"

namespace oodknn {

namespace {

void require_scores(std::span<const double> scores, const char* what) {
  if (scores.empty()) fail(ErrorKind::Input, std::string(what) + " scores are empty");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) {
      fail(ErrorKind::Input, std::string(what) + " score " + std::to_string(i) + " is NaN");
    }
  }
}

}  // namespace

DetectionThreshold calibrate(std::span<const double> id_scores, double tpr_level) {
  require_scores(id_scores, "in-distribution");
  if (!(tpr_level > 0.0 && tpr_level <= 1.0)) {
    fail(ErrorKind::Config, "tpr level must be in (0, 1]");
  }
  std::vector<double> sorted(id_scores.begin(), id_scores.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // The epsilon absorbs rounding in (1 - tpr) * n when the exact product is an
  // integer, e.g. (1 - 0.9) * 10 = 0.9999999999999998.
  auto index = static_cast<std::size_t>(
      std::floor((1.0 - tpr_level) * static_cast<double>(n) + 1e-9));
  index = std::min(index, n - 1);
  return {sorted[index], tpr_level, n};
}

Verdict decide(double score, const DetectionThreshold& threshold) noexcept {
  return score >= threshold.gamma ? Verdict::Id : Verdict::Ood;
}

double fpr_at_tpr(std::span<const double> id_scores,
                  std::span<const double> ood_scores, double tpr_level) {
  require_scores(ood_scores, "out-of-distribution");
  const auto threshold = calibrate(id_scores, tpr_level);
  const auto accepted = std::count_if(ood_scores.begin(), ood_scores.end(), [&](double s) {
    return decide(s, threshold) == Verdict::Id;
  });
  return static_cast<double>(accepted) / static_cast<double>(ood_scores.size());
}

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
  require_scores(id_scores, "in-distribution");
  require_scores(ood_scores, "out-of-distribution");
  std::vector<std::pair<double, bool>> all;
  all.reserve(id_scores.size() + ood_scores.size());
  for (double s : id_scores) all.emplace_back(s, true);
  for (double s : ood_scores) all.emplace_back(s, false);
  std::sort(all.begin(), all.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  // Tied groups share the mean of their 1-based ranks.
  double id_rank_sum = 0.0;
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    std::size_t ids = 0;
    while (j < all.size() && all[j].first == all[i].first) ids += all[j++].second;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    id_rank_sum += midrank * static_cast<double>(ids);
    i = j;
  }
  const double n_id = static_cast<double>(id_scores.size());
  const double n_ood = static_cast<double>(ood_scores.size());
  return (id_rank_sum - n_id * (n_id + 1.0) / 2.0) / (n_id * n_ood);
}

Histogram score_histogram(std::span<const double> scores, std::size_t n_bins) {
  require_scores(scores, "histogram");
  if (n_bins == 0) fail(ErrorKind::Config, "histogram needs at least one bin");
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorKind::Input, "histogram scores must be finite");
  }
  const auto [lo_it, hi_it] = std::minmax_element(scores.begin(), scores.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram h;
  if (lo == hi) {
    h.edges = {lo, hi};
    h.counts = {scores.size()};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(n_bins);
  h.edges.resize(n_bins + 1);
  for (std::size_t i = 0; i < n_bins; ++i) h.edges[i] = lo + static_cast<double>(i) * width;
  h.edges[n_bins] = hi;
  h.counts.assign(n_bins, 0);
  for (double s : scores) {
    const auto bin = static_cast<std::size_t>(std::floor((s - lo) / width));
    ++h.counts[std::min(bin, n_bins - 1)];
  }
  return h;
}

}  // namespace oodknn
