#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace oodknn {

enum class MatrixKind : std::uint8_t { Embeddings = 0, Logits = 1 };

/// Tolerance on |norm - 1| for a row to count as unit length.
inline constexpr double kUnitNormTolerance = 1e-5;

/// Dense row-major float32 matrix holding either embeddings or logits.
///
/// Construction validates the shape and rejects non-finite entries, so every
/// live Matrix satisfies its invariants. The `normalized` flag is derived from
/// the data: it is true iff every row has unit L2 norm within
/// kUnitNormTolerance. Matrices are immutable and safe to share across
/// threads.
class Matrix {
 public:
  Matrix(MatrixKind kind, std::size_t rows, std::size_t cols,
         std::vector<float> data);

  MatrixKind kind() const noexcept { return kind_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool normalized() const noexcept { return normalized_; }

  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  /// Bitwise equality of kind, shape and payload.
  friend bool operator==(const Matrix& a, const Matrix& b) noexcept;

 private:
  MatrixKind kind_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> data_;
  bool normalized_ = false;
};

/// Scales every row to unit L2 norm. Throws ErrorKind::Validation naming the
/// first row whose norm is zero.
Matrix l2_normalize(const Matrix& m);

double l2_norm(std::span<const float> v) noexcept;

}  // namespace oodknn
