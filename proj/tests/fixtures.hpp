#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "oodknn/matrix.hpp"

namespace fixtures {

inline std::vector<double> to_double(std::span<const float> row) {
  return {row.begin(), row.end()};
}

inline std::vector<std::vector<double>> rows_of(const oodknn::Matrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(to_double(m.row(i)));
  return out;
}

/// n random unit vectors in R^d (normalized Gaussians).
inline oodknn::Matrix random_unit(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<float> data(n * d);
  for (auto& v : data) v = g(rng);
  return oodknn::l2_normalize(
      oodknn::Matrix(oodknn::MatrixKind::Embeddings, n, d, std::move(data)));
}

/// Raw (unnormalized) points around `center * scale` with isotropic noise.
inline oodknn::Matrix cluster(std::size_t n, const std::vector<float>& center, float sigma,
                              std::mt19937_64& rng, float scale = 1.0f) {
  std::normal_distribution<float> g(0.0f, sigma);
  const std::size_t d = center.size();
  std::vector<float> data(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) data[i * d + j] = scale * (center[j] + g(rng));
  }
  return oodknn::Matrix(oodknn::MatrixKind::Embeddings, n, d, std::move(data));
}

inline std::vector<float> basis(std::size_t d, std::size_t axis) {
  std::vector<float> v(d, 0.0f);
  v[axis] = 1.0f;
  return v;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::uint64_t counter = 0;
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("oodknn-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
