#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "oodknn/error.hpp"
#include "oodknn/parallel.hpp"
#include "oodknn/scorers.hpp"
#include "seed.hpp"

namespace oodknn {

double average_path_length(std::size_t n) noexcept {
  if (n <= 1) return 0.0;
  double harmonic = 0.0;
  for (std::size_t i = 1; i < n; ++i) harmonic += 1.0 / static_cast<double>(i);
  const double nd = static_cast<double>(n);
  return 2.0 * harmonic - 2.0 * (nd - 1.0) / nd;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& train, std::size_t height_limit, std::uint64_t seed)
      : train_(train), height_limit_(height_limit), rng_(seed) {}

  IForestScorer::Tree build(std::vector<std::size_t> sample) {
    tree_.clear();
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::span<std::size_t> rows, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.size());
    tree_.push_back({});
    tree_[id].size = static_cast<std::uint32_t>(rows.size());
    if (depth >= height_limit_ || rows.size() <= 1) return id;

    std::size_t feature = 0;
    double lo = 0.0;
    double hi = 0.0;
    if (!pick_split_feature(rows, feature, lo, hi)) return id;

    std::uniform_real_distribution<double> uniform(lo, hi);
    double threshold = uniform(rng_);
    if (!(threshold > lo && threshold < hi)) threshold = lo + 0.5 * (hi - lo);

    auto mid = std::partition(rows.begin(), rows.end(), [&](std::size_t r) {
      return train_.row(r)[feature] < threshold;
    });
    const auto split = static_cast<std::size_t>(mid - rows.begin());
    const auto left = grow(rows.first(split), depth + 1);
    const auto right = grow(rows.subspan(split), depth + 1);
    auto& node = tree_[id];
    node.left = left;
    node.right = right;
    node.feature = static_cast<std::uint32_t>(feature);
    node.threshold = threshold;
    return id;
  }

  std::pair<double, double> range(std::span<const std::size_t> rows,
                                  std::size_t feature) const {
    double lo = train_.row(rows[0])[feature];
    double hi = lo;
    for (std::size_t r : rows) {
      const double v = train_.row(r)[feature];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    return {lo, hi};
  }

  // Draws a feature uniformly; if it is constant on this node, draws again
  // among the non-constant ones. Returns false when every feature is constant.
  bool pick_split_feature(std::span<const std::size_t> rows, std::size_t& feature,
                          double& lo, double& hi) {
    const std::size_t d = train_.cols();
    std::uniform_int_distribution<std::size_t> any(0, d - 1);
    feature = any(rng_);
    std::tie(lo, hi) = range(rows, feature);
    if (lo < hi) return true;
    std::vector<std::size_t> candidates;
    for (std::size_t f = 0; f < d; ++f) {
      auto [a, b] = range(rows, f);
      if (a < b) candidates.push_back(f);
    }
    if (candidates.empty()) return false;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    feature = candidates[pick(rng_)];
    std::tie(lo, hi) = range(rows, feature);
    return true;
  }

  const Matrix& train_;
  std::size_t height_limit_;
  std::mt19937_64 rng_;
  IForestScorer::Tree tree_;
};

}  // namespace

IForestScorer::IForestScorer(ScorerConfig config, const Matrix& train)
    : Scorer(config), dims_(train.cols()) {
  const auto& cfg = this->config();
  sample_size_ = std::min(cfg.subsample, train.rows());
  if (sample_size_ < 2) {
    fail(ErrorKind::Config, "iforest needs a subsample of at least 2 rows");
  }
  const auto height_limit = static_cast<std::size_t>(
      std::ceil(std::log2(static_cast<double>(sample_size_))));

  trees_.resize(cfg.n_estimators);
  parallel_for(cfg.n_estimators, 0, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> pool(train.rows());
    for (std::size_t t = begin; t < end; ++t) {
      const auto seed = detail::stream_seed(cfg.seed, t);
      std::mt19937_64 sampler(seed);
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      // Partial Fisher-Yates: the first sample_size_ slots are the subsample.
      for (std::size_t i = 0; i < sample_size_; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(sampler)]);
      }
      std::vector<std::size_t> sample(pool.begin(),
                                      pool.begin() + static_cast<std::ptrdiff_t>(sample_size_));
      std::sort(sample.begin(), sample.end());
      TreeBuilder builder(train, height_limit, detail::splitmix64(seed));
      trees_[t] = builder.build(std::move(sample));
    }
  });
}

IForestScorer::IForestScorer(ScorerConfig config, std::size_t dims,
                             std::size_t sample_size, std::vector<Tree> trees)
    : Scorer(config), dims_(dims), sample_size_(sample_size), trees_(std::move(trees)) {
  if (trees_.empty() || sample_size_ < 2) {
    fail(ErrorKind::Config, "iforest needs at least one tree and sample size >= 2");
  }
}

double IForestScorer::mean_path_length(std::span<const float> x) const {
  double total = 0.0;
  for (const auto& tree : trees_) {
    std::size_t depth = 0;
    const Node* node = &tree[0];
    while (node->left >= 0) {
      node = x[node->feature] < node->threshold ? &tree[node->left] : &tree[node->right];
      ++depth;
    }
    total += static_cast<double>(depth) + average_path_length(node->size);
  }
  return total / static_cast<double>(trees_.size());
}

double IForestScorer::score_row(std::span<const float> x) const {
  return -std::exp2(-mean_path_length(x) / average_path_length(sample_size_));
}

}  // namespace oodknn
