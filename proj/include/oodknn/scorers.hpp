#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oodknn/config.hpp"
#include "oodknn/knn.hpp"
#include "oodknn/matrix.hpp"

namespace oodknn {

/// A fitted, immutable detector. Scores are oriented so that higher means
/// more in-distribution.
class Scorer {
 public:
  explicit Scorer(ScorerConfig config) : config_(config) {}
  virtual ~Scorer() = default;

  const ScorerConfig& config() const noexcept { return config_; }
  Method method() const noexcept { return config_.method; }

  virtual MatrixKind input_kind() const noexcept {
    return MatrixKind::Embeddings;
  }
  /// Expected input width; 0 accepts any width (MSP).
  virtual std::size_t dims() const noexcept = 0;
  /// Scores one row. Throws ErrorKind::Shape on a width mismatch.
  double score(std::span<const float> x) const;

 protected:
  virtual double score_row(std::span<const float> x) const = 0;

 private:
  ScorerConfig config_;
};

struct ScoreVector {
  std::vector<double> scores;
  ScorerConfig config;
  std::string dataset;
};

/// Fits the detector selected by `config.method`. `train` must be a
/// normalized embedding matrix for every method except MSP, which ignores it.
std::shared_ptr<const Scorer> fit(const ScorerConfig& config,
                                  const Matrix& train);

/// Scores every row of `data`; ordering and values do not depend on
/// `workers`. Throws ErrorKind::Config when the matrix kind does not match
/// the scorer.
ScoreVector score_batch(const Scorer& scorer, const Matrix& data,
                        std::string dataset = {}, unsigned workers = 0);

/// Maximum softmax probability, computed with max subtraction.
double score_msp(std::span<const float> logits);

// Detectors ------------------------------------------------------------------

/// Negated distance to the k-th nearest training embedding.
class KnnScorer final : public Scorer {
 public:
  KnnScorer(ScorerConfig config, KnnIndex index);
  std::size_t dims() const noexcept override { return index_.dims(); }
  const KnnIndex& index() const noexcept { return index_; }

 protected:
  double score_row(std::span<const float> q) const override;

 private:
  KnnIndex index_;
};

class MspScorer final : public Scorer {
 public:
  explicit MspScorer(ScorerConfig config) : Scorer(config) {}
  MatrixKind input_kind() const noexcept override { return MatrixKind::Logits; }
  std::size_t dims() const noexcept override { return 0; }

 protected:
  double score_row(std::span<const float> logits) const override {
    return score_msp(logits);
  }
};

/// Negated local outlier factor of the query against the training set.
class LofScorer final : public Scorer {
 public:
  LofScorer(ScorerConfig config, KnnIndex index);
  std::size_t dims() const noexcept override { return index_.dims(); }

  std::span<const double> k_distances() const noexcept { return k_distance_; }
  std::span<const double> lrd() const noexcept { return lrd_; }
  /// Raw LOF_k(q), i.e. -score(q).
  double local_outlier_factor(std::span<const float> q) const;

 protected:
  double score_row(std::span<const float> q) const override {
    return -local_outlier_factor(q);
  }

 private:
  KnnIndex index_;
  std::vector<double> k_distance_;
  std::vector<double> lrd_;
};

/// Negated squared reconstruction error after projecting onto the top
/// principal directions of the training set.
class PcaScorer final : public Scorer {
 public:
  PcaScorer(ScorerConfig config, const Matrix& train);
  std::size_t dims() const noexcept override { return mean_.size(); }

  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  /// d x n_components, orthonormal columns, descending eigenvalue order.
  const Eigen::MatrixXd& components() const noexcept { return components_; }
  const Eigen::VectorXd& explained_variance() const noexcept {
    return variance_;
  }

 protected:
  double score_row(std::span<const float> q) const override;

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd components_;
  Eigen::VectorXd variance_;
};

/// Isolation-forest detector; score is -2^(-E[h(x)]/c(psi)).
class IForestScorer final : public Scorer {
 public:
  struct Node {
    // Internal nodes have left/right >= 0; leaves store their sample count.
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t feature = 0;
    double threshold = 0.0;
    std::uint32_t size = 0;
    bool operator==(const Node&) const = default;
  };
  using Tree = std::vector<Node>;

  IForestScorer(ScorerConfig config, const Matrix& train);
  /// Assembles a forest from prebuilt trees; used to score hand-built cases.
  IForestScorer(ScorerConfig config, std::size_t dims, std::size_t sample_size,
                std::vector<Tree> trees);

  std::size_t dims() const noexcept override { return dims_; }
  std::size_t sample_size() const noexcept { return sample_size_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }

  /// Mean over trees of the path length of x, with the c(size) correction at
  /// leaves that hold more than one sample.
  double mean_path_length(std::span<const float> x) const;

 protected:
  double score_row(std::span<const float> x) const override;

 private:
  std::size_t dims_;
  std::size_t sample_size_;
  std::vector<Tree> trees_;
};

/// Average path length of an unsuccessful BST search over n points:
/// c(n) = 2 H(n-1) - 2 (n-1) / n, with c(0) = c(1) = 0.
double average_path_length(std::size_t n) noexcept;

/// Ensemble of one-dimensional histograms over sparse random projections;
/// score is the mean log density.
class LodaScorer final : public Scorer {
 public:
  struct Projection {
    std::vector<std::uint32_t> features;
    std::vector<double> weights;
    double lo = 0.0;
    double hi = 0.0;
    /// Smoothed log density per bin.
    std::vector<double> log_density;
    bool operator==(const Projection&) const = default;
  };

  LodaScorer(ScorerConfig config, const Matrix& train);

  std::size_t dims() const noexcept override { return dims_; }
  const std::vector<Projection>& projections() const noexcept {
    return projections_;
  }

 protected:
  double score_row(std::span<const float> x) const override;

 private:
  std::size_t dims_;
  std::vector<Projection> projections_;
};

}  // namespace oodknn
