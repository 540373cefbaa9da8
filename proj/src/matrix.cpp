#include "oodknn/matrix.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "oodknn/error.hpp"

namespace oodknn {

double l2_norm(std::span<const float> v) noexcept {
  double sum = 0.0;
  for (float x : v) sum += static_cast<double>(x) * x;
  return std::sqrt(sum);
}

Matrix::Matrix(MatrixKind kind, std::size_t rows, std::size_t cols,
               std::vector<float> data)
    : kind_(kind), rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ == 0 || cols_ == 0) {
    fail(ErrorKind::Validation,
         "matrix must have at least one row and one column (got " +
             std::to_string(rows_) + "x" + std::to_string(cols_) + ")");
  }
  if (data_.size() != rows_ * cols_) {
    fail(ErrorKind::Validation,
         "matrix payload has " + std::to_string(data_.size()) +
             " values, expected " + std::to_string(rows_ * cols_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      fail(ErrorKind::Validation, "non-finite value at row " +
                                      std::to_string(i / cols_) + ", column " +
                                      std::to_string(i % cols_));
    }
  }
  normalized_ = true;
  for (std::size_t r = 0; r < rows_ && normalized_; ++r) {
    normalized_ = std::abs(l2_norm(row(r)) - 1.0) <= kUnitNormTolerance;
  }
}

bool operator==(const Matrix& a, const Matrix& b) noexcept {
  return a.kind_ == b.kind_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ &&
         std::memcmp(a.data_.data(), b.data_.data(),
                     a.data_.size() * sizeof(float)) == 0;
}

Matrix l2_normalize(const Matrix& m) {
  if (m.kind() != MatrixKind::Embeddings) {
    fail(ErrorKind::Validation, "only embedding matrices can be normalized");
  }
  std::vector<float> out(m.rows() * m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double norm = l2_norm(row);
    if (norm == 0.0) {
      fail(ErrorKind::Validation,
           "row " + std::to_string(r) + " has zero L2 norm");
    }
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out[r * m.cols() + c] = static_cast<float>(row[c] / norm);
    }
  }
  return Matrix(MatrixKind::Embeddings, m.rows(), m.cols(), std::move(out));
}

}  // namespace oodknn
