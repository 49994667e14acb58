#include <doctest.h>

#include <cmath>
#include <vector>

#include "padbench/metrics.hpp"
#include "padbench/rng.hpp"
#include "padbench/types.hpp"

using namespace padbench;

namespace {

// independent brute-force oracle for confusion counting
Confusion oracle_confusion(const std::vector<double>& scores,
                           const std::vector<BinaryLabel>& labels, double tau) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool attack_truth = labels[i] == BinaryLabel::attack;
    const bool attack_call = scores[i] >= tau;
    if (attack_truth && attack_call) ++c.tp_attack;
    if (attack_truth && !attack_call) ++c.fn_attack;
    if (!attack_truth && !attack_call) ++c.tn_bona;
    if (!attack_truth && attack_call) ++c.fp_bona;
  }
  return c;
}

Confusion confusion_with_rates(std::size_t n_attack, std::size_t fn, std::size_t n_bona,
                               std::size_t fp) {
  Confusion c;
  c.fn_attack = fn;
  c.tp_attack = n_attack - fn;
  c.fp_bona = fp;
  c.tn_bona = n_bona - fp;
  return c;
}

}  // namespace

TEST_CASE("confusion basic example") {
  const auto c = confusion({0.9, 0.1}, {BinaryLabel::attack, BinaryLabel::bona_fide}, 0.5);
  CHECK(c.tp_attack == 1);
  CHECK(c.tn_bona == 1);
  CHECK(c.fp_bona == 0);
  CHECK(c.fn_attack == 0);
}

TEST_CASE("score exactly at threshold is classified attack") {
  const auto c = confusion({0.5}, {BinaryLabel::attack}, 0.5);
  CHECK(c.tp_attack == 1);
  const auto c2 = confusion({0.5}, {BinaryLabel::bona_fide}, 0.5);
  CHECK(c2.fp_bona == 1);
}

TEST_CASE("confusion rejects mismatched lengths") {
  CHECK_THROWS_AS(confusion({0.5, 0.6}, {BinaryLabel::attack}, 0.5), ValidationError);
}

TEST_CASE("confusion matches brute-force oracle on random data") {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(50);
    std::vector<double> scores(n);
    std::vector<BinaryLabel> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.uniform();
      labels[i] = rng.uniform() < 0.5 ? BinaryLabel::attack : BinaryLabel::bona_fide;
    }
    const double tau = rng.uniform();
    const auto got = confusion(scores, labels, tau);
    const auto want = oracle_confusion(scores, labels, tau);
    REQUIRE(got.tp_attack == want.tp_attack);
    REQUIRE(got.fn_attack == want.fn_attack);
    REQUIRE(got.tn_bona == want.tn_bona);
    REQUIRE(got.fp_bona == want.fp_bona);
  }
}

TEST_CASE("report reproduces published ACER arithmetic") {
  // APCER 12.08%, BPCER 0.90% -> ACER 6.49%
  auto r = report(confusion_with_rates(10000, 1208, 10000, 90), 0.4);
  REQUIRE(r.acer.has_value());
  CHECK(round_percent_2dp(*r.acer * 100.0) == doctest::Approx(6.49).epsilon(1e-12));

  // APCER 5.82%, BPCER 8.25% -> ACER 7.04% (2 dp)
  r = report(confusion_with_rates(10000, 582, 10000, 825), 0.5);
  CHECK(round_percent_2dp(*r.acer * 100.0) == doctest::Approx(7.04).epsilon(1e-12));
}

TEST_CASE("all-correct report") {
  const auto r = report(confusion_with_rates(50, 0, 70, 0), 0.5);
  CHECK(r.ccr == doctest::Approx(1.0));
  CHECK(*r.apcer == 0.0);
  CHECK(*r.bpcer == 0.0);
}

TEST_CASE("report rejects empty confusion") {
  CHECK_THROWS_AS(report(Confusion{}, 0.5), ValidationError);
}

TEST_CASE("apcer absent when no attacks present") {
  const auto r = report(confusion_with_rates(0, 0, 10, 2), 0.5);
  CHECK_FALSE(r.apcer.has_value());
  CHECK(r.bpcer.has_value());
  CHECK_FALSE(r.acer.has_value());
  CHECK(r.ccr == doctest::Approx(0.8));
}

TEST_CASE("ccr reconstruction identity holds exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(100);
    std::vector<double> scores(n);
    std::vector<BinaryLabel> labels(n);
    bool has_attack = false, has_bona = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.uniform();
      const bool attack = rng.uniform() < 0.5;
      labels[i] = attack ? BinaryLabel::attack : BinaryLabel::bona_fide;
      (attack ? has_attack : has_bona) = true;
    }
    if (!has_attack || !has_bona) continue;
    const auto r = report(confusion(scores, labels, rng.uniform()), 0.5);
    const double reconstructed =
        1.0 - (*r.apcer * r.n_attack + *r.bpcer * r.n_bona) / (r.n_attack + r.n_bona);
    REQUIRE(r.ccr == reconstructed);
  }
}

TEST_CASE("error counts are monotone in the threshold") {
  Rng rng(13);
  std::vector<double> scores(200);
  std::vector<BinaryLabel> labels(200);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform();
    labels[i] = rng.uniform() < 0.5 ? BinaryLabel::attack : BinaryLabel::bona_fide;
  }
  for (int trial = 0; trial < 200; ++trial) {
    double t1 = rng.uniform(), t2 = rng.uniform();
    if (t2 < t1) std::swap(t1, t2);
    const auto c1 = confusion(scores, labels, t1);
    const auto c2 = confusion(scores, labels, t2);
    REQUIRE(c2.fp_bona <= c1.fp_bona);
    REQUIRE(c2.fn_attack >= c1.fn_attack);
  }
}

TEST_CASE("threshold_at_fdr picks the sentinel when only it qualifies") {
  const std::vector<double> scores = {0.1, 0.2, 0.3, 0.9};
  const std::vector<BinaryLabel> labels(4, BinaryLabel::bona_fide);
  const double tau = threshold_at_fdr(scores, labels, 0.0);
  CHECK(tau > 0.9);
  CHECK(confusion(scores, labels, tau).fp_bona == 0);
}

TEST_CASE("threshold_at_fdr with all-zero bona fide scores") {
  const std::vector<double> scores = {0.0, 0.0, 0.0, 0.5, 0.7};
  const std::vector<BinaryLabel> labels = {BinaryLabel::bona_fide, BinaryLabel::bona_fide,
                                           BinaryLabel::bona_fide, BinaryLabel::attack,
                                           BinaryLabel::attack};
  const double tau = threshold_at_fdr(scores, labels, 0.002);
  CHECK(tau == doctest::Approx(0.5));  // smallest positive observed score
}

TEST_CASE("threshold_at_fdr requires bona fide samples") {
  CHECK_THROWS_AS(threshold_at_fdr({0.5}, {BinaryLabel::attack}, 0.002), ValidationError);
}

TEST_CASE("threshold_at_fdr agrees with exhaustive scan and is minimal") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 20 + rng.uniform_index(200);
    std::vector<double> scores(n);
    std::vector<BinaryLabel> labels(n);
    bool any_bona = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = rng.uniform();
      const bool bona = rng.uniform() < 0.6;
      labels[i] = bona ? BinaryLabel::bona_fide : BinaryLabel::attack;
      any_bona |= bona;
    }
    if (!any_bona) {
      labels[0] = BinaryLabel::bona_fide;
    }
    const double target = 0.002 + rng.uniform() * 0.2;
    const double tau = threshold_at_fdr(scores, labels, target);

    std::size_t n_bona = 0;
    for (auto l : labels) {
      if (l == BinaryLabel::bona_fide) ++n_bona;
    }
    auto fdr_at = [&](double t) {
      std::size_t fp = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] == BinaryLabel::bona_fide && scores[i] >= t) ++fp;
      }
      return static_cast<double>(fp) / static_cast<double>(n_bona);
    };
    REQUIRE(fdr_at(tau) <= target);
    // minimality: every strictly smaller observed candidate violates the target
    for (double candidate : scores) {
      if (candidate < tau) REQUIRE(fdr_at(candidate) > target);
    }
  }
}

TEST_CASE("aggregate of identical folds has zero std") {
  const auto r = report(confusion_with_rates(100, 7, 100, 3), 0.5);
  const auto agg = aggregate_folds({r, r, r, r, r});
  CHECK(agg.fold_count == 5);
  CHECK(agg.ccr.stddev == doctest::Approx(0.0));
  CHECK(agg.apcer.mean == doctest::Approx(0.07));
}

TEST_CASE("aggregate mean and sample std over two folds") {
  // CCR folds {10%, 20%} -> mean 15%, sample std ~7.071%
  MetricsReport a, b;
  a.ccr = 0.10;
  b.ccr = 0.20;
  const auto agg = aggregate_folds({a, b});
  CHECK(agg.ccr.mean == doctest::Approx(0.15));
  CHECK(agg.ccr.stddev * 100.0 == doctest::Approx(7.0710678).epsilon(1e-6));
}

TEST_CASE("aggregate of a single fold") {
  MetricsReport a;
  a.ccr = 0.5;
  const auto agg = aggregate_folds({a});
  CHECK(agg.fold_count == 1);
  CHECK(agg.ccr.stddev == 0.0);
}

TEST_CASE("aggregate rejects empty input") {
  CHECK_THROWS_AS(aggregate_folds({}), ValidationError);
}

TEST_CASE("report json round-trip") {
  const auto r = report(confusion_with_rates(100, 7, 50, 3), 0.4);
  const auto back = metrics_report_from_json(metrics_report_to_json(r));
  CHECK(back.ccr == r.ccr);
  CHECK(*back.apcer == *r.apcer);
  CHECK(*back.bpcer == *r.bpcer);
  CHECK(*back.acer == *r.acer);
  CHECK(back.n_attack == r.n_attack);
  CHECK(back.threshold == r.threshold);
}

TEST_CASE("percent formatting matches table style") {
  CHECK(format_percent(0.1208) == "12.08");
  CHECK(format_percent(0.0009) == "0.09");
  CHECK(format_percent(1.0) == "100.00");
  // half-way cases round up, decimally
  CHECK(round_percent_2dp(7.035) == doctest::Approx(7.04).epsilon(1e-12));
  CHECK(round_percent_2dp(36.255) == doctest::Approx(36.26).epsilon(1e-12));
}
