#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "oodknn/matrix.hpp"

namespace oodknn {

/// k nearest reference rows, ascending by distance, ties broken by lower
/// reference index.
struct NeighborList {
  std::vector<double> distances;
  std::vector<std::size_t> indices;

  std::size_t size() const noexcept { return distances.size(); }
  bool operator==(const NeighborList&) const = default;
};

/// Exact Euclidean k-nearest-neighbor index over a normalized reference set.
///
/// Distances are accumulated in double precision as
/// sqrt(max(0, |z|^2 + |q|^2 - 2<z,q>)), and the k best candidates are kept in
/// a bounded max-heap. The index is immutable after construction and may be
/// queried concurrently.
class KnnIndex {
 public:
  KnnIndex(std::shared_ptr<const Matrix> reference, std::size_t k_max);

  /// `q` must be unit length and match the reference dimensionality.
  NeighborList query(std::span<const float> q, std::size_t k) const;

  /// Row i of the result equals query(queries.row(i), k) for any worker count.
  std::vector<NeighborList> batch_query(const Matrix& queries, std::size_t k,
                                        unsigned workers = 0) const;
  /// Same over a flat row-major buffer of queries; an empty buffer yields an
  /// empty result.
  std::vector<NeighborList> batch_query(std::span<const float> queries,
                                        std::size_t k,
                                        unsigned workers = 0) const;

  /// Unchecked search used by scorers that query with arbitrary vectors.
  /// `exclude` drops one reference row from consideration. `k` may not exceed
  /// the number of eligible rows.
  NeighborList search(std::span<const float> q, std::size_t k,
                      std::optional<std::size_t> exclude = std::nullopt) const;

  const Matrix& reference() const noexcept { return *reference_; }
  std::size_t k_max() const noexcept { return k_max_; }
  std::size_t dims() const noexcept { return reference_->cols(); }

 private:
  void check_query(std::span<const float> q, std::size_t k) const;

  std::shared_ptr<const Matrix> reference_;
  std::vector<double> squared_norms_;
  std::size_t k_max_;
};

KnnIndex build_index(Matrix train, std::size_t k_max);

}  // namespace oodknn
