#include "oodknn/knn.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <utility>

#include "oodknn/error.hpp"
#include "oodknn/parallel.hpp"

namespace oodknn {

namespace {

double dot(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

}  // namespace

KnnIndex::KnnIndex(std::shared_ptr<const Matrix> reference, std::size_t k_max)
    : reference_(std::move(reference)), k_max_(k_max) {
  if (!reference_) fail(ErrorKind::Config, "knn index needs a reference matrix");
  if (reference_->kind() != MatrixKind::Embeddings || !reference_->normalized()) {
    fail(ErrorKind::Validation,
         "knn reference set must be unit-normalized embeddings");
  }
  if (k_max_ == 0 || k_max_ > reference_->rows()) {
    fail(ErrorKind::Config, "k_max must be in [1, " +
                                std::to_string(reference_->rows()) + "], got " +
                                std::to_string(k_max_));
  }
  squared_norms_.resize(reference_->rows());
  for (std::size_t i = 0; i < reference_->rows(); ++i) {
    squared_norms_[i] = dot(reference_->row(i), reference_->row(i));
  }
}

KnnIndex build_index(Matrix train, std::size_t k_max) {
  return KnnIndex(std::make_shared<const Matrix>(std::move(train)), k_max);
}

void KnnIndex::check_query(std::span<const float> q, std::size_t k) const {
  if (q.size() != dims()) {
    fail(ErrorKind::Shape, "query has dimension " + std::to_string(q.size()) +
                               ", index expects " + std::to_string(dims()));
  }
  if (k == 0 || k > k_max_) {
    fail(ErrorKind::Config, "k must be in [1, " + std::to_string(k_max_) +
                                "], got " + std::to_string(k));
  }
}

NeighborList KnnIndex::query(std::span<const float> q, std::size_t k) const {
  check_query(q, k);
  if (std::abs(std::sqrt(dot(q, q)) - 1.0) > kUnitNormTolerance) {
    fail(ErrorKind::Validation, "knn query vector is not unit-normalized");
  }
  return search(q, k);
}

NeighborList KnnIndex::search(std::span<const float> q, std::size_t k,
                              std::optional<std::size_t> exclude) const {
  const Matrix& ref = *reference_;
  const std::size_t eligible = ref.rows() - (exclude ? 1 : 0);
  if (q.size() != dims()) {
    fail(ErrorKind::Shape, "query has dimension " + std::to_string(q.size()) +
                               ", index expects " + std::to_string(dims()));
  }
  if (k == 0 || k > eligible) {
    fail(ErrorKind::Config, "k must be in [1, " + std::to_string(eligible) +
                                "], got " + std::to_string(k));
  }
  const double q_norm = dot(q, q);
  // Rows are visited in increasing index order, so a strict `<` keeps the
  // lower index on equal distances.
  std::priority_queue<std::pair<double, std::size_t>> heap;
  for (std::size_t i = 0; i < ref.rows(); ++i) {
    if (exclude && *exclude == i) continue;
    const double d2 =
        std::max(0.0, squared_norms_[i] + q_norm - 2.0 * dot(ref.row(i), q));
    const double d = std::sqrt(d2);
    if (heap.size() < k) {
      heap.emplace(d, i);
    } else if (d < heap.top().first) {
      heap.pop();
      heap.emplace(d, i);
    }
  }
  NeighborList out;
  out.distances.resize(heap.size());
  out.indices.resize(heap.size());
  for (std::size_t j = heap.size(); j-- > 0;) {
    out.distances[j] = heap.top().first;
    out.indices[j] = heap.top().second;
    heap.pop();
  }
  return out;
}

std::vector<NeighborList> KnnIndex::batch_query(const Matrix& queries,
                                                std::size_t k,
                                                unsigned workers) const {
  return batch_query(queries.data(), k, workers);
}

std::vector<NeighborList> KnnIndex::batch_query(std::span<const float> queries,
                                                std::size_t k,
                                                unsigned workers) const {
  if (queries.size() % dims() != 0) {
    fail(ErrorKind::Shape, "query buffer of " + std::to_string(queries.size()) +
                               " values is not a multiple of dimension " +
                               std::to_string(dims()));
  }
  const std::size_t n = queries.size() / dims();
  std::vector<NeighborList> out(n);
  parallel_for(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = query(queries.subspan(i * dims(), dims()), k);
    }
  });
  return out;
}

}  // namespace oodknn
