#include "oodknn/scorers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oodknn/error.hpp"
#include "oodknn/parallel.hpp"

namespace oodknn {

double Scorer::score(std::span<const float> x) const {
  if (dims() != 0 && x.size() != dims()) {
    fail(ErrorKind::Shape, std::string(method_name(method())) +
                               " scorer expects dimension " +
                               std::to_string(dims()) + ", got " +
                               std::to_string(x.size()));
  }
  return score_row(x);
}

double score_msp(std::span<const float> logits) {
  if (logits.size() < 2) {
    fail(ErrorKind::Config, "MSP needs at least two classes");
  }
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (float l : logits) sum += std::exp(static_cast<double>(l) - top);
  // exp(top - top) == 1 is the largest term.
  return 1.0 / sum;
}

KnnScorer::KnnScorer(ScorerConfig config, KnnIndex index)
    : Scorer(config), index_(std::move(index)) {}

double KnnScorer::score_row(std::span<const float> q) const {
  return -index_.query(q, config().k).distances.back();
}

std::shared_ptr<const Scorer> fit(const ScorerConfig& config,
                                  const Matrix& train) {
  config.validate();
  if (config.method == Method::Msp) return std::make_shared<MspScorer>(config);

  if (train.kind() != MatrixKind::Embeddings || !train.normalized()) {
    fail(ErrorKind::Validation, std::string(method_name(config.method)) +
                                    " must be fitted on unit-normalized embeddings");
  }
  switch (config.method) {
    case Method::Knn:
      if (config.k > train.rows()) {
        fail(ErrorKind::Config, "knn k=" + std::to_string(config.k) +
                                    " exceeds training rows " +
                                    std::to_string(train.rows()));
      }
      return std::make_shared<KnnScorer>(config, build_index(train, config.k));
    case Method::Lof:
      if (config.k + 1 > train.rows()) {
        fail(ErrorKind::Config, "lof k=" + std::to_string(config.k) +
                                    " needs more than k training rows, got " +
                                    std::to_string(train.rows()));
      }
      return std::make_shared<LofScorer>(config, build_index(train, config.k));
    case Method::Pca:
      return std::make_shared<PcaScorer>(config, train);
    case Method::IForest:
      return std::make_shared<IForestScorer>(config, train);
    case Method::Loda:
      return std::make_shared<LodaScorer>(config, train);
    case Method::Msp:
      break;
  }
  fail(ErrorKind::Config, "unsupported method");
}

ScoreVector score_batch(const Scorer& scorer, const Matrix& data,
                        std::string dataset, unsigned workers) {
  if (data.kind() != scorer.input_kind()) {
    fail(ErrorKind::Config,
         std::string(method_name(scorer.method())) + " scores " +
             (scorer.input_kind() == MatrixKind::Logits ? "logits" : "embeddings") +
             ", got " +
             (data.kind() == MatrixKind::Logits ? "logits" : "embeddings"));
  }
  if (scorer.dims() != 0 && data.cols() != scorer.dims()) {
    fail(ErrorKind::Shape, "dataset '" + dataset + "' has dimension " +
                               std::to_string(data.cols()) + ", scorer expects " +
                               std::to_string(scorer.dims()));
  }
  ScoreVector out{std::vector<double>(data.rows()), scorer.config(),
                  std::move(dataset)};
  parallel_for(data.rows(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out.scores[i] = scorer.score(data.row(i));
  });
  return out;
}

}  // namespace oodknn
