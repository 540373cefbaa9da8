#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oodknn/error.hpp"
#include "oodknn/scorers.hpp"
#include "oracles.hpp"

using namespace oodknn;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an oodknn::Error");
  return ErrorKind::Input;
}

ScorerConfig config_for(Method m) { return ScorerConfig::defaults(m); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("config defaults and key=value round trip") {
  CHECK(config_for(Method::Knn).k == 5);
  CHECK(config_for(Method::Lof).k == 20);
  CHECK(config_for(Method::Pca).n_components == 128);
  CHECK(config_for(Method::IForest).n_estimators == 100);
  CHECK(config_for(Method::IForest).subsample == 256);
  CHECK(config_for(Method::Loda).n_bins == 10);
  CHECK(config_for(Method::Loda).n_projections == 100);

  auto c = config_for(Method::Loda);
  c.seed = 42;
  c.n_bins = 7;
  CHECK(c.to_string() == "method=loda\nn_bins=7\nn_projections=100\nseed=42\n");
  CHECK(ScorerConfig::parse(c.to_string()) == c);
  CHECK(ScorerConfig::parse(c.to_inline_string()) == c);
  CHECK(ScorerConfig::parse("method=knn\nk=100\n").k == 100);
  CHECK(kind_of([] { ScorerConfig::parse("k=3"); }) == ErrorKind::Config);
  CHECK(kind_of([] { ScorerConfig::parse("method=svm"); }) == ErrorKind::Config);
  CHECK(kind_of([] { ScorerConfig::parse("method=knn\nbogus=1"); }) == ErrorKind::Config);
  CHECK(kind_of([] { ScorerConfig::parse("method=knn\nk=-1"); }) == ErrorKind::Config);
  auto zero = config_for(Method::Knn);
  zero.k = 0;
  CHECK(kind_of([&] { zero.validate(); }) == ErrorKind::Config);
}

TEST_CASE("fit preconditions") {
  std::mt19937_64 rng(1);
  const auto train = fixtures::random_unit(100, 16, rng);
  auto knn = fit(config_for(Method::Knn), train);
  CHECK(dynamic_cast<const KnnScorer*>(knn.get()) != nullptr);
  CHECK(knn->dims() == 16);

  const auto ten = fixtures::random_unit(10, 4, rng);
  CHECK(kind_of([&] { fit(config_for(Method::Lof), ten); }) == ErrorKind::Config);
  auto big_k = config_for(Method::Knn);
  big_k.k = 11;
  CHECK(kind_of([&] { fit(big_k, ten); }) == ErrorKind::Config);
  auto pca = config_for(Method::Pca);
  pca.n_components = 5;
  CHECK(kind_of([&] { fit(pca, ten); }) == ErrorKind::Config);
  const Matrix raw(MatrixKind::Embeddings, 2, 2, {2, 0, 0, 2});
  CHECK(kind_of([&] { fit(config_for(Method::Knn), raw); }) == ErrorKind::Validation);
}

TEST_CASE("knn score examples") {
  const Matrix basis(MatrixKind::Embeddings, 3, 3, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto cfg = config_for(Method::Knn);
  cfg.k = 2;
  const auto s = fit(cfg, basis);
  const float e1[] = {1, 0, 0};
  CHECK(s->score(e1) == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-12));
  cfg.k = 1;
  CHECK(fit(cfg, basis)->score(e1) == 0.0);
  const float wrong[] = {1, 0};
  CHECK(kind_of([&] { s->score(wrong); }) == ErrorKind::Shape);
}

TEST_CASE("knn score equals negated k-th oracle distance and knn-core d_k") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + rng() % 200;
    const std::size_t d = 2 + rng() % 14;
    const std::size_t k = 1 + rng() % 10;
    const auto train = fixtures::random_unit(n, d, rng);
    const auto q = fixtures::random_unit(5, d, rng);
    auto cfg = config_for(Method::Knn);
    cfg.k = k;
    const auto s = fit(cfg, train);
    const auto& index = dynamic_cast<const KnnScorer&>(*s).index();
    const auto rows = fixtures::rows_of(train);
    for (std::size_t i = 0; i < q.rows(); ++i) {
      const auto all = oracle::sorted_distances(rows, fixtures::to_double(q.row(i)));
      CHECK(std::abs(s->score(q.row(i)) + all[k - 1].first) <= 1e-5);
      CHECK(s->score(q.row(i)) == -index.query(q.row(i), k).distances.back());
    }
  }
}

TEST_CASE("msp examples") {
  const float even[] = {0, 0};
  CHECK(score_msp(even) == 0.5);
  const float saturated[] = {1000, 0};
  CHECK(std::abs(score_msp(saturated) - 1.0) <= 1e-12);
  const float three[] = {1, 2, 3};
  const double reference = static_cast<double>(oracle::msp({1.0L, 2.0L, 3.0L}));
  CHECK(std::abs(score_msp(three) - reference) <= 1e-12);
  CHECK(score_msp(three) == doctest::Approx(0.665241).epsilon(1e-6));
  const float one[] = {4};
  CHECK(kind_of([&] { score_msp(one); }) == ErrorKind::Config);
}

TEST_CASE("msp range and softmax normalization on random logits") {
  std::mt19937_64 rng(17);
  std::normal_distribution<float> g(0.0f, 50.0f);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t c = 2 + rng() % 30;
    std::vector<float> logits(c);
    for (auto& l : logits) l = g(rng);
    const double p = score_msp(logits);
    CHECK(p > 1.0 / static_cast<double>(c));
    CHECK(p <= 1.0);
    // sum of softmax = sum exp(l - max) * p
    const double top = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (float l : logits) total += std::exp(double(l) - top) * p;
    CHECK(std::abs(total - 1.0) <= 1e-12);
  }
}

TEST_CASE("lof matches the textbook formulas on small random instances") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 15; ++trial) {
    const std::size_t d = 4;
    const auto train = fixtures::random_unit(50, d, rng);
    const auto queries = fixtures::random_unit(5, d, rng);
    auto cfg = config_for(Method::Lof);
    cfg.k = 5;
    const auto s = fit(cfg, train);
    const auto rows = fixtures::rows_of(train);
    for (std::size_t i = 0; i < queries.rows(); ++i) {
      const double expected = oracle::lof(rows, fixtures::to_double(queries.row(i)), 5);
      CHECK(std::abs(-s->score(queries.row(i)) - expected) <= 1e-8);
    }
  }
}

TEST_CASE("lof on a uniform grid cluster and a far point") {
  // 15x15 grid in the tangent plane at e3, projected onto the sphere.
  std::vector<float> data;
  for (int i = -7; i <= 7; ++i) {
    for (int j = -7; j <= 7; ++j) {
      const double x = 0.01 * i, y = 0.01 * j, norm = std::sqrt(x * x + y * y + 1.0);
      data.insert(data.end(), {float(x / norm), float(y / norm), float(1.0 / norm)});
    }
  }
  const Matrix train(MatrixKind::Embeddings, 225, 3, data);
  const auto s = fit(config_for(Method::Lof), train);  // k = 20
  const auto center = train.row(112);
  const auto rows = fixtures::rows_of(train);
  const double expected_center = oracle::lof(rows, fixtures::to_double(center), 20);
  CHECK(std::abs(-s->score(center) - expected_center) <= 1e-8);
  CHECK(std::abs(s->score(center) + 1.0) <= 0.2);
  const float far[] = {1, 0, 0};
  const double expected_far = oracle::lof(rows, {1, 0, 0}, 20);
  CHECK(std::abs(-s->score(far) - expected_far) <= 1e-8 * expected_far);
  CHECK(s->score(far) < -2.0);
}

TEST_CASE("lof with duplicate points stays finite") {
  const Matrix dup(MatrixKind::Embeddings, 4, 2, {1, 0, 1, 0, 1, 0, 0, 1});
  auto cfg = config_for(Method::Lof);
  cfg.k = 2;
  const auto s = fit(cfg, dup);
  const float q[] = {1, 0};
  CHECK(std::isfinite(s->score(q)));
  const float other[] = {0.6f, 0.8f};
  CHECK(std::isfinite(s->score(other)));
}

TEST_CASE("pca subspace membership and complete basis") {
  // Two unit points; their chord is the single principal direction.
  const float a[] = {0.6f, 0.8f, 0.0f};
  const float b[] = {0.0f, 0.6f, 0.8f};
  const Matrix two(MatrixKind::Embeddings, 2, 3, {a[0], a[1], a[2], b[0], b[1], b[2]});
  auto cfg = config_for(Method::Pca);
  cfg.n_components = 1;
  const auto s = fit(cfg, two);
  const auto& pca = dynamic_cast<const PcaScorer&>(*s);
  for (double t : {-3.0, -0.5, 0.0, 0.25, 2.0}) {
    float q[3];
    for (int j = 0; j < 3; ++j) q[j] = float(pca.mean()(j) + t * (b[j] - a[j]));
    CHECK(std::abs(s->score(q)) <= 1e-10);
  }
  float mu[3];
  for (int j = 0; j < 3; ++j) mu[j] = float(pca.mean()(j));
  CHECK(std::abs(s->score(mu)) <= 1e-12);
  const float off[] = {0, 0, 1};
  CHECK(s->score(off) < -1e-3);

  std::mt19937_64 rng(4);
  const auto train = fixtures::random_unit(40, 6, rng);
  cfg.n_components = 6;
  const auto full = fit(cfg, train);
  const auto& p = dynamic_cast<const PcaScorer&>(*full).components();
  CHECK((p.transpose() * p - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
  std::normal_distribution<float> g(0.0f, 5.0f);
  for (int i = 0; i < 20; ++i) {
    float q[6];
    for (auto& v : q) v = g(rng);
    CHECK(std::abs(full->score(q)) <= 1e-8);
  }
}

TEST_CASE("pca components are sorted by explained variance") {
  std::mt19937_64 rng(12);
  const auto train = fixtures::random_unit(60, 8, rng);
  auto cfg = config_for(Method::Pca);
  cfg.n_components = 4;
  const auto s = fit(cfg, train);
  const auto& v = dynamic_cast<const PcaScorer&>(*s).explained_variance();
  for (Eigen::Index i = 1; i < v.size(); ++i) CHECK(v(i - 1) >= v(i));
}

TEST_CASE("iforest average path length and hand-built tree") {
  CHECK(average_path_length(1) == 0.0);
  CHECK(average_path_length(2) == 1.0);
  // c(3) = 2 * (1 + 1/2) - 2 * 2/3 = 5/3
  CHECK(average_path_length(3) == doctest::Approx(5.0 / 3.0).epsilon(1e-15));

  // Root splits feature 0 at 0.5; both leaves hold one sample.
  IForestScorer::Tree tree(3);
  tree[0] = {1, 2, 0, 0.5, 2};
  tree[1] = {-1, -1, 0, 0.0, 1};
  tree[2] = {-1, -1, 0, 0.0, 1};
  const IForestScorer forest(config_for(Method::IForest), 1, 2, {tree});
  const float q[] = {0.9f};
  CHECK(forest.mean_path_length(q) == 1.0);
  CHECK(forest.score(q) == -0.5);

  // Fitted version: two distinct points, one tree, subsample 2.
  auto cfg = config_for(Method::IForest);
  cfg.n_estimators = 1;
  const Matrix pair(MatrixKind::Embeddings, 2, 2, {1, 0, 0, 1});
  const auto fitted = fit(cfg, pair);
  const float any[] = {0.6f, 0.8f};
  CHECK(fitted->score(any) == -0.5);
}

TEST_CASE("iforest: mean path equal to c(psi) scores -0.5; leaf sizes are corrected") {
  // One leaf holding all 8 samples at the root: E[h] = c(8).
  IForestScorer::Tree leaf(1);
  leaf[0] = {-1, -1, 0, 0.0, 8};
  const IForestScorer forest(config_for(Method::IForest), 2, 8, {leaf});
  const float q[] = {0.0f, 1.0f};
  CHECK(forest.mean_path_length(q) == average_path_length(8));
  CHECK(forest.score(q) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("iforest ranks a far point below a cluster member and is seed-deterministic") {
  std::mt19937_64 rng(31);
  const auto train = l2_normalize(fixtures::cluster(500, fixtures::basis(8, 0), 0.05f, rng));
  auto cfg = config_for(Method::IForest);
  cfg.seed = 77;
  const auto a = fit(cfg, train);
  const auto b = fit(cfg, train);
  const auto& fa = dynamic_cast<const IForestScorer&>(*a);
  const auto& fb = dynamic_cast<const IForestScorer&>(*b);
  CHECK(fa.trees() == fb.trees());
  CHECK(fa.trees().size() == 100);
  CHECK(fa.sample_size() == 256);

  cfg.seed = 78;
  const auto c = fit(cfg, train);
  CHECK(dynamic_cast<const IForestScorer&>(*c).trees() != fa.trees());

  const auto inside = train.row(0);
  const auto far = fixtures::basis(8, 3);
  CHECK(a->score(inside) > a->score(far));
  // Outlier 10 sigma away along another axis, then renormalized.
  std::vector<float> shifted(inside.begin(), inside.end());
  shifted[1] += 0.5f;
  const auto out = l2_normalize(Matrix(MatrixKind::Embeddings, 1, 8, shifted));
  CHECK(a->score(inside) > a->score(out.row(0)));
}

TEST_CASE("loda smoothed density by hand") {
  // All 20 training rows identical: range widened to unit width, all counts
  // in one bin. Density there is (20+1)/(20+10) * 10 / 1 = 7.
  std::vector<float> same;
  for (int i = 0; i < 20; ++i) same.insert(same.end(), {0.6f, 0.8f});
  const Matrix train(MatrixKind::Embeddings, 20, 2, same);
  auto cfg = config_for(Method::Loda);
  cfg.n_projections = 1;
  const auto s = fit(cfg, train);
  const float q[] = {0.6f, 0.8f};
  CHECK(s->score(q) == doctest::Approx(std::log(7.0)).epsilon(1e-12));

  // 1-D data: 3 rows at +1, 5 at -1. Projections land on the two edge bins.
  std::vector<float> pm = {1, 1, 1, -1, -1, -1, -1, -1};
  const Matrix line(MatrixKind::Embeddings, 8, 1, pm);
  const auto s1 = fit(cfg, line);
  const auto& proj = dynamic_cast<const LodaScorer&>(*s1).projections().at(0);
  const double w = std::abs(proj.weights.at(0));
  const double range = 2.0 * w;
  const float plus[] = {1.0f};
  const float minus[] = {-1.0f};
  const float middle[] = {0.0f};
  CHECK(s1->score(plus) == doctest::Approx(std::log(4.0 / 18.0 * 10.0 / range)).epsilon(1e-12));
  CHECK(s1->score(minus) == doctest::Approx(std::log(6.0 / 18.0 * 10.0 / range)).epsilon(1e-12));
  // Empty middle bin: smoothing floor, finite.
  CHECK(s1->score(middle) == doctest::Approx(std::log(1.0 / 18.0 * 10.0 / range)).epsilon(1e-12));
  // Out of range maps to the nearest edge bin.
  const float beyond[] = {5.0f};
  CHECK(s1->score(beyond) == s1->score(plus));
}

TEST_CASE("loda projections are sparse and seed-deterministic") {
  std::mt19937_64 rng(41);
  const auto train = fixtures::random_unit(200, 30, rng);
  auto cfg = config_for(Method::Loda);
  cfg.seed = 5;
  const auto a = fit(cfg, train);
  const auto b = fit(cfg, train);
  const auto& pa = dynamic_cast<const LodaScorer&>(*a).projections();
  CHECK(pa == dynamic_cast<const LodaScorer&>(*b).projections());
  REQUIRE(pa.size() == 100);
  for (const auto& p : pa) {
    CHECK(p.features.size() == 6);  // ceil(sqrt(30))
    CHECK(p.log_density.size() == 10);
  }
}

TEST_CASE("every method scores a far orthogonal cluster below the median ID training score") {
  std::mt19937_64 rng(57);
  const std::size_t d = 16;
  const auto train = l2_normalize(fixtures::cluster(300, fixtures::basis(d, 0), 0.08f, rng));
  const auto far = l2_normalize(fixtures::cluster(50, fixtures::basis(d, 1), 0.08f, rng));
  for (Method m : {Method::Knn, Method::Lof, Method::Pca, Method::IForest, Method::Loda}) {
    CAPTURE(method_name(m));
    auto cfg = config_for(m);
    cfg.n_components = 4;
    const auto s = fit(cfg, train);
    const double id_median = median(score_batch(*s, train).scores);
    for (double v : score_batch(*s, far).scores) {
      CHECK(std::isfinite(v));
      CHECK(v < id_median);
    }
  }
  // MSP: peaked logits for ID, flat logits for OOD.
  const auto msp = fit(config_for(Method::Msp), train);
  const Matrix id_logits(MatrixKind::Logits, 2, 3, {8, 0, 0, 0, 9, 1});
  const Matrix ood_logits(MatrixKind::Logits, 2, 3, {0.1f, 0, 0, 1, 1, 1});
  const double id_med = median(score_batch(*msp, id_logits).scores);
  for (double v : score_batch(*msp, ood_logits).scores) CHECK(v < id_med);
}

TEST_CASE("score_batch: kind checks, permutation, worker invariance") {
  std::mt19937_64 rng(61);
  const auto train = fixtures::random_unit(150, 8, rng);
  const auto data = fixtures::random_unit(40, 8, rng);
  const auto s = fit(config_for(Method::Knn), train);

  const Matrix logits(MatrixKind::Logits, 1, 8, std::vector<float>(8, 0.0f));
  CHECK(kind_of([&] { score_batch(*s, logits); }) == ErrorKind::Config);
  CHECK(kind_of([&] { score_batch(*fit(config_for(Method::Msp), train), data); }) ==
        ErrorKind::Config);
  CHECK(kind_of([&] { score_batch(*s, fixtures::random_unit(3, 4, rng)); }) == ErrorKind::Shape);

  const auto one = score_batch(*s, data, "x", 1);
  CHECK(one.dataset == "x");
  CHECK(one.config == s->config());
  CHECK(one.scores[3] == s->score(data.row(3)));

  std::vector<float> reversed;
  for (std::size_t i = data.rows(); i-- > 0;) {
    reversed.insert(reversed.end(), data.row(i).begin(), data.row(i).end());
  }
  const auto rev = score_batch(*s, Matrix(MatrixKind::Embeddings, 40, 8, reversed));
  for (std::size_t i = 0; i < 40; ++i) CHECK(rev.scores[i] == one.scores[39 - i]);

  for (Method m : {Method::Knn, Method::Lof, Method::Pca, Method::IForest, Method::Loda}) {
    auto cfg = config_for(m);
    cfg.n_components = 8;
    const auto fitted = fit(cfg, train);
    CHECK(score_batch(*fitted, data, "", 1).scores == score_batch(*fitted, data, "", 5).scores);
  }
}

TEST_CASE("knn pipeline absorbs input scale") {
  std::mt19937_64 rng(71);
  const auto raw_train = fixtures::cluster(200, fixtures::basis(12, 0), 0.3f, rng);
  const auto raw_test = fixtures::cluster(30, fixtures::basis(12, 2), 0.3f, rng);
  const auto s = fit(config_for(Method::Knn), l2_normalize(raw_train));
  const auto base = score_batch(*s, l2_normalize(raw_test)).scores;
  for (float c : {2.0f, 0.125f, 3.7f, 1234.5f}) {
    std::vector<float> scaled(raw_test.data().begin(), raw_test.data().end());
    for (auto& v : scaled) v *= c;
    const auto got =
        score_batch(*s, l2_normalize(Matrix(MatrixKind::Embeddings, 30, 12, scaled))).scores;
    for (std::size_t i = 0; i < got.size(); ++i) {
      if (c == 2.0f || c == 0.125f) {
        CHECK(got[i] == base[i]);
      } else {
        CHECK(std::abs(got[i] - base[i]) <= 1e-6);
      }
    }
  }
}
