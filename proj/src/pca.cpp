#include <string>

#include "oodknn/error.hpp"
#include "oodknn/scorers.hpp"

namespace oodknn {

PcaScorer::PcaScorer(ScorerConfig config, const Matrix& train) : Scorer(config) {
  const auto n = static_cast<Eigen::Index>(train.rows());
  const auto d = static_cast<Eigen::Index>(train.cols());
  const auto m = static_cast<Eigen::Index>(this->config().n_components);
  if (m > d) {
    fail(ErrorKind::Config, "pca n_components=" + std::to_string(m) +
                                " exceeds dimension " + std::to_string(d));
  }
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    auto row = train.row(static_cast<std::size_t>(r));
    for (Eigen::Index c = 0; c < d; ++c) x(r, c) = row[static_cast<std::size_t>(c)];
  }
  mean_ = x.colwise().mean().transpose();
  x.rowwise() -= mean_.transpose();
  const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
  const Eigen::MatrixXd cov = (x.transpose() * x) / denom;

  // Eigenvalues come back ascending; keep the last m columns, largest first.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::Validation, "covariance eigendecomposition did not converge");
  }
  components_ = solver.eigenvectors().rightCols(m).rowwise().reverse();
  variance_ = solver.eigenvalues().tail(m).reverse();
}

double PcaScorer::score_row(std::span<const float> q) const {
  Eigen::VectorXd x(mean_.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    x(i) = static_cast<double>(q[static_cast<std::size_t>(i)]) - mean_(i);
  }
  const Eigen::VectorXd residual = x - components_ * (components_.transpose() * x);
  return -residual.squaredNorm();
}

}  // namespace oodknn
