#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "oodknn/error.hpp"
#include "oodknn/eval.hpp"
#include "oodknn/report.hpp"
#include "oracles.hpp"

using namespace oodknn;

namespace {

std::vector<double> one_to(int n) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), 1.0);
  return v;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an oodknn::Error");
  return ErrorKind::Input;
}

}  // namespace

TEST_CASE("calibrate examples") {
  const auto ids = one_to(100);
  const auto t = calibrate(ids, 0.95);
  CHECK(t.gamma == 6.0);
  CHECK(t.n_id == 100);
  CHECK(std::count_if(ids.begin(), ids.end(), [&](double s) { return s >= t.gamma; }) == 95);

  const std::vector<double> single{7.0};
  CHECK(calibrate(single, 0.95).gamma == 7.0);
  CHECK(calibrate(ids, 1.0).gamma == 1.0);
  // (1 - 0.9) * 10 rounds to 0.999...; the exact index is 1.
  CHECK(calibrate(one_to(10), 0.9).gamma == 2.0);

  CHECK(kind_of([] { calibrate(std::vector<double>{}, 0.95); }) == ErrorKind::Input);
  CHECK(kind_of([&] { calibrate(ids, 0.0); }) == ErrorKind::Config);
  CHECK(kind_of([&] { calibrate(ids, 1.5); }) == ErrorKind::Config);
}

TEST_CASE("decide is inclusive at gamma") {
  const DetectionThreshold t{6.0, 0.95, 100};
  CHECK(decide(6.0, t) == Verdict::Id);
  CHECK(decide(std::nextafter(6.0, 0.0), t) == Verdict::Ood);
  CHECK(decide(5.0, calibrate(one_to(100), 0.95)) == Verdict::Ood);
}

TEST_CASE("fpr_at_tpr examples") {
  const auto ids = one_to(100);
  CHECK(fpr_at_tpr(ids, std::vector<double>{6, 5, 0, 0}, 0.95) == 0.25);
  CHECK(fpr_at_tpr(ids, std::vector<double>{0.5, -3}, 0.95) == 0.0);
  // Same multiset: gamma = 6 accepts 95 of 100.
  CHECK(fpr_at_tpr(ids, ids, 0.95) == 0.95);
  CHECK(kind_of([&] { fpr_at_tpr(ids, std::vector<double>{}, 0.95); }) == ErrorKind::Input);
}

TEST_CASE("auroc examples") {
  CHECK(auroc(std::vector<double>{0.9, 0.8}, std::vector<double>{0.1, 0.2}) == 1.0);
  CHECK(auroc(std::vector<double>{0.5}, std::vector<double>{0.5}) == 0.5);
  CHECK(auroc(std::vector<double>{0.9, 0.3}, std::vector<double>{0.5, 0.1}) == 0.75);
  CHECK(kind_of([] { auroc(std::vector<double>{}, std::vector<double>{1}); }) == ErrorKind::Input);
  CHECK(kind_of([] { auroc(std::vector<double>{NAN}, std::vector<double>{1}); }) ==
        ErrorKind::Input);
}

TEST_CASE("auroc properties: pairwise oracle, monotone invariance, complement") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n1 = 1 + rng() % 200;
    const std::size_t n2 = 1 + rng() % 200;
    // Small integer support forces ties.
    std::uniform_int_distribution<int> coarse(0, 1 + static_cast<int>(rng() % 20));
    std::vector<double> a(n1), b(n2);
    for (auto& v : a) v = coarse(rng);
    for (auto& v : b) v = coarse(rng) - 1;
    const double got = auroc(a, b);
    CHECK(std::abs(got - oracle::pairwise_auroc(a, b)) <= 1e-12);

    auto f = [](double x) { return std::exp(0.3 * x) - 7.0; };
    std::vector<double> fa(a), fb(b);
    std::transform(fa.begin(), fa.end(), fa.begin(), f);
    std::transform(fb.begin(), fb.end(), fb.begin(), f);
    CHECK(std::abs(auroc(fa, fb) - got) <= 1e-12);

    std::normal_distribution<double> g;
    std::vector<double> ca(n1), cb(n2);
    for (auto& v : ca) v = g(rng);
    for (auto& v : cb) v = g(rng);
    CHECK(std::abs(auroc(ca, cb) + auroc(cb, ca) - 1.0) <= 1e-12);
  }
}

TEST_CASE("threshold contract and fpr monotonicity on fuzzed sets") {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng() % 500;
    std::vector<double> ids(n), oods(1 + rng() % 100);
    for (auto& v : ids) v = std::round(g(rng) * 4.0);
    for (auto& v : oods) v = g(rng) * 3.0 - 1.0;
    const double tpr = std::uniform_real_distribution<double>(0.01, 1.0)(rng);
    const auto t = calibrate(ids, tpr);
    const auto accepted = std::count_if(ids.begin(), ids.end(),
                                        [&](double s) { return decide(s, t) == Verdict::Id; });
    CHECK(static_cast<double>(accepted) >= tpr * static_cast<double>(n) - 1e-9);
    CHECK(std::find(ids.begin(), ids.end(), t.gamma) != ids.end());

    const double higher = std::min(1.0, tpr + 0.1);
    CHECK(calibrate(ids, higher).gamma <= t.gamma);
    CHECK(fpr_at_tpr(ids, oods, higher) >= fpr_at_tpr(ids, oods, tpr));
  }
}

TEST_CASE("histogram examples") {
  const auto h = score_histogram(std::vector<double>{0, 1}, 2);
  CHECK(h.edges == std::vector<double>{0, 0.5, 1});
  CHECK(h.counts == std::vector<std::size_t>{1, 1});

  const auto flat = score_histogram(std::vector<double>(9, 3.5), 10);
  CHECK(flat.counts == std::vector<std::size_t>{9});
  CHECK(format_histogram(flat) == "3.5 9\n");

  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> scores(1000);
  for (auto& v : scores) v = u(rng);
  const auto uh = score_histogram(scores, 10);
  REQUIRE(uh.counts.size() == 10);
  CHECK(std::accumulate(uh.counts.begin(), uh.counts.end(), std::size_t{0}) == 1000);
  const double sigma = std::sqrt(1000 * 0.1 * 0.9);
  for (auto c : uh.counts) CHECK(std::abs(static_cast<double>(c) - 100.0) <= 5 * sigma);

  CHECK(kind_of([] { score_histogram(std::vector<double>{}, 3); }) == ErrorKind::Input);
  CHECK(kind_of([] { score_histogram(std::vector<double>{1}, 0); }) == ErrorKind::Config);
}

TEST_CASE("eval report, mean row and serializations") {
  ScoreVector id{one_to(100), ScorerConfig::defaults(Method::Knn), "vocal"};
  ScoreVector a{{6, 5, 0, 0}, id.config, "esc50"};
  ScoreVector b{{200, 300}, id.config, "crema"};
  const auto ra = evaluate(id, a, 0.95);
  CHECK(ra.fpr_at_tpr95 == 0.25);
  CHECK(ra.gamma == 6.0);
  CHECK(ra.n_id == 100);
  CHECK(ra.n_ood == 4);
  CHECK(ra.auroc == doctest::Approx(oracle::pairwise_auroc(id.scores, a.scores)));
  const auto rb = evaluate(id, b, 0.95);
  CHECK(rb.fpr_at_tpr95 == 1.0);
  CHECK(rb.auroc == 0.0);

  const std::vector<EvalReport> reports{ra, rb};
  const auto mean = unweighted_mean(reports);
  CHECK(mean.ood_dataset == kMeanRowName);
  CHECK(mean.fpr_at_tpr95 == 0.625);
  CHECK(mean.n_ood == 6);

  const auto text = format_text(reports);
  CHECK(text.find("id_dataset=vocal ood_dataset=esc50 method=knn k=5 tpr_level=0.95 "
                  "fpr_at_tpr95=0.25") == 0);
  const auto json = nlohmann::json::parse(format_json(reports));
  REQUIRE(json.size() == 2);
  CHECK(json[0]["ood_dataset"] == "esc50");
  CHECK(json[0]["method"] == "method=knn k=5");
  CHECK(json[0]["fpr_at_tpr95"] == 0.25);
  CHECK(json[1]["n_ood"] == 2);
  CHECK(json[1]["gamma"] == 6.0);
}

TEST_CASE("score files round trip") {
  ScoreVector v{{-0.1, 0.30000000000000004, -1e-300, 42}, ScorerConfig::defaults(Method::Lof),
                "crema"};
  const auto text = format_scores(v);
  CHECK(text.rfind("# dataset=crema\n# method=lof\n# k=20\n", 0) == 0);
  const auto back = parse_scores(text);
  CHECK(back.has_config);
  CHECK(back.scores.scores == v.scores);
  CHECK(back.scores.dataset == "crema");
  CHECK(back.scores.config == v.config);

  const auto plain = parse_scores(format_scores(v, false));
  CHECK_FALSE(plain.has_config);
  CHECK(plain.scores.scores == v.scores);

  const auto bare = parse_scores("1\n2.5\n\n3\n");
  CHECK_FALSE(bare.has_config);
  CHECK(bare.scores.scores == std::vector<double>{1, 2.5, 3});
  CHECK(kind_of([] { parse_scores("# dataset=x\n"); }) == ErrorKind::Input);
  CHECK(kind_of([] { parse_scores("1\nabc\n"); }) == ErrorKind::Format);
  CHECK(kind_of([] { parse_scores("nan\n"); }) == ErrorKind::Format);
}
