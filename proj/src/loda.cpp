#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oodknn/parallel.hpp"
#include "oodknn/scorers.hpp"
#include "seed.hpp"

namespace oodknn {

namespace {

double project(const LodaScorer::Projection& p, std::span<const float> x) {
  double v = 0.0;
  for (std::size_t j = 0; j < p.features.size(); ++j) v += p.weights[j] * x[p.features[j]];
  return v;
}

std::size_t bin_of(const LodaScorer::Projection& p, double v) {
  const std::size_t bins = p.log_density.size();
  const double width = (p.hi - p.lo) / static_cast<double>(bins);
  const double pos = std::floor((v - p.lo) / width);
  if (!(pos > 0.0)) return 0;  // also catches NaN from an infinite input
  return std::min(static_cast<std::size_t>(pos), bins - 1);
}

}  // namespace

LodaScorer::LodaScorer(ScorerConfig config, const Matrix& train)
    : Scorer(config), dims_(train.cols()) {
  const auto& cfg = this->config();
  const std::size_t n = train.rows();
  const std::size_t bins = cfg.n_bins;
  const auto nonzero = std::min<std::size_t>(
      dims_, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dims_)))));

  projections_.resize(cfg.n_projections);
  parallel_for(cfg.n_projections, 0, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint32_t> pool(dims_);
    std::vector<double> values(n);
    for (std::size_t j = begin; j < end; ++j) {
      std::mt19937_64 rng(detail::stream_seed(cfg.seed, j));
      std::iota(pool.begin(), pool.end(), 0u);
      for (std::size_t i = 0; i < nonzero; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, dims_ - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      Projection p;
      p.features.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(nonzero));
      std::sort(p.features.begin(), p.features.end());
      std::normal_distribution<double> gaussian(0.0, 1.0);
      p.weights.resize(nonzero);
      for (auto& w : p.weights) w = gaussian(rng);

      for (std::size_t r = 0; r < n; ++r) values[r] = project(p, train.row(r));
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      p.lo = *lo;
      p.hi = *hi;
      if (!(p.hi > p.lo)) {
        // All training projections coincide: use a unit-wide range around them.
        p.lo -= 0.5;
        p.hi += 0.5;
      }
      p.log_density.assign(bins, 0.0);
      std::vector<std::size_t> counts(bins, 0);
      for (double v : values) ++counts[bin_of(p, v)];
      const double width = (p.hi - p.lo) / static_cast<double>(bins);
      const double total = static_cast<double>(n + bins) * width;
      for (std::size_t b = 0; b < bins; ++b) {
        p.log_density[b] = std::log((static_cast<double>(counts[b]) + 1.0) / total);
      }
      projections_[j] = std::move(p);
    }
  });
}

double LodaScorer::score_row(std::span<const float> x) const {
  double sum = 0.0;
  for (const auto& p : projections_) sum += p.log_density[bin_of(p, project(p, x))];
  return sum / static_cast<double>(projections_.size());
}

}  // namespace oodknn
