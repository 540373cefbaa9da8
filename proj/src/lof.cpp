#include <algorithm>
#include <cmath>

#include "oodknn/scorers.hpp"

namespace oodknn {

namespace {

constexpr double kReachFloor = 1e-12;

}  // namespace

LofScorer::LofScorer(ScorerConfig config, KnnIndex index)
    : Scorer(config), index_(std::move(index)) {
  const Matrix& train = index_.reference();
  const std::size_t n = train.rows();
  const std::size_t k = this->config().k;

  std::vector<NeighborList> neighbors(n);
  k_distance_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i] = index_.search(train.row(i), k, i);
    k_distance_[i] = neighbors[i].distances.back();
  }
  lrd_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double reach = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      reach += std::max(k_distance_[neighbors[i].indices[j]],
                        neighbors[i].distances[j]);
    }
    lrd_[i] = 1.0 / std::max(reach / static_cast<double>(k), kReachFloor);
  }
}

double LofScorer::local_outlier_factor(std::span<const float> q) const {
  const std::size_t k = config().k;
  const auto nb = index_.search(q, k);
  double reach = 0.0;
  double neighbor_lrd = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    reach += std::max(k_distance_[nb.indices[j]], nb.distances[j]);
    neighbor_lrd += lrd_[nb.indices[j]];
  }
  const double lrd_q = 1.0 / std::max(reach / static_cast<double>(k), kReachFloor);
  return neighbor_lrd / static_cast<double>(k) / lrd_q;
}

}  // namespace oodknn
