#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace oodknn {

enum class Method { Knn, Msp, Lof, Pca, IForest, Loda };

std::string_view method_name(Method m) noexcept;
/// Accepts the lowercase names emitted by method_name(). Throws
/// ErrorKind::Config on anything else.
Method parse_method(std::string_view name);

/// Hyperparameters for every detector. Only the fields relevant to `method`
/// are serialized.
struct ScorerConfig {
  Method method = Method::Knn;
  std::size_t k = 5;
  std::size_t n_components = 128;
  std::size_t n_estimators = 100;
  std::size_t subsample = 256;
  std::size_t n_bins = 10;
  std::size_t n_projections = 100;
  std::uint64_t seed = 0;

  /// Defaults per method: knn k=5, lof k=20, pca 128 components, iforest 100
  /// trees on 256-row subsamples, loda 100 projections of 10 bins.
  static ScorerConfig defaults(Method method);

  /// Flat `key=value` block, one pair per line, `method` first.
  std::string to_string() const;
  /// Same pairs joined by single spaces, for one-line records.
  std::string to_inline_string() const;
  /// Inverse of to_string(); unknown keys are a config error, missing keys
  /// take the method's defaults.
  static ScorerConfig parse(std::string_view text);

  /// Throws ErrorKind::Config when a relevant count is zero.
  void validate() const;

  bool operator==(const ScorerConfig&) const = default;
};

}  // namespace oodknn
