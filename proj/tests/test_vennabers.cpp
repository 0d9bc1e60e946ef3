#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "support/oracle.hpp"
#include "vareg/rng.hpp"
#include "vareg/vennabers.hpp"

using namespace vareg;

namespace {

// Fixed-output rule for tests that need a base regressor without training.
class IdentityFirstFeature final : public PredictionRule {
 public:
  double predict(std::span<const double> x) const override { return x[0]; }
};

Trainer identity_trainer() {
  return [](const DataMatrix&, std::span<const double>) -> RulePtr {
    return std::make_shared<IdentityFirstFeature>();
  };
}

DataMatrix single_column(const std::vector<double>& values) {
  DataMatrix m(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) m.at(i, 0) = values[i];
  return m;
}

}  // namespace

TEST_CASE("split_training produces a disjoint cover of the requested sizes") {
  const auto split = split_training(10, 3, 99);
  CHECK(split.calibration.size() == 3);
  CHECK(split.proper.size() == 7);
  std::set<std::size_t> all(split.calibration.begin(), split.calibration.end());
  all.insert(split.proper.begin(), split.proper.end());
  CHECK(all.size() == 10);
  CHECK(*all.rbegin() == 9);
}

TEST_CASE("split_training is deterministic per seed") {
  const auto a = split_training(50, 11, 1234);
  const auto b = split_training(50, 11, 1234);
  CHECK(a.calibration == b.calibration);
  CHECK(a.proper == b.proper);
  const auto c = split_training(50, 11, 1235);
  CHECK(a.calibration != c.calibration);
}

TEST_CASE("split_training samples calibration sets uniformly") {
  // Each of 5 examples should land in a k=2 calibration set with frequency
  // 2/5, within 3 binomial standard errors over 1000 seeds.
  std::vector<int> hits(5, 0);
  const int reps = 1000;
  for (int s = 0; s < reps; ++s) {
    const auto split = split_training(5, 2, 7000 + static_cast<std::uint64_t>(s));
    for (std::size_t i : split.calibration) hits[i] += 1;
  }
  const double p = 2.0 / 5.0;
  const double band = 3.0 * std::sqrt(p * (1 - p) / reps);
  for (int h : hits) {
    CHECK(std::fabs(h / static_cast<double>(reps) - p) <= band);
  }
}

TEST_CASE("split_training rejects oversized calibration sets") {
  CHECK_THROWS_WITH(split_training(5, 5, 1), "calibration size too large");
  CHECK_THROWS_WITH(split_training(3, 7, 1), "calibration size too large");
}

TEST_CASE("winsorize upper-fit replaces the m smallest, keeps the mth largest") {
  const std::vector<double> labels = {1, 2, 3, 4, 5};
  const auto w = winsorize(labels, 1, WinsorMode::upper_fit);
  CHECK(w.labels == std::vector<double>{2, 2, 3, 4, 5});
  CHECK(w.low_anchor == 2);
  CHECK(w.high_anchor == 5);
}

TEST_CASE("winsorize lower-fit mirrors the asymmetry") {
  const std::vector<double> labels = {1, 2, 3, 4, 5};
  const auto w = winsorize(labels, 1, WinsorMode::lower_fit);
  CHECK(w.labels == std::vector<double>{1, 2, 3, 4, 4});
  CHECK(w.low_anchor == 1);
  CHECK(w.high_anchor == 4);
}

TEST_CASE("winsorize keeps constant labels unchanged") {
  const std::vector<double> labels = {7, 7, 7};
  for (auto mode : {WinsorMode::upper_fit, WinsorMode::lower_fit}) {
    const auto w = winsorize(labels, 1, mode);
    CHECK(w.labels == labels);
    CHECK(w.low_anchor == 7);
    CHECK(w.high_anchor == 7);
  }
}

TEST_CASE("winsorize validates 2m < k") {
  const std::vector<double> labels = {1, 2, 3, 4};
  CHECK_THROWS(winsorize(labels, 2, WinsorMode::upper_fit));
  CHECK_THROWS(winsorize(labels, 0, WinsorMode::upper_fit));
}

TEST_CASE("winsorized labels stay within the anchors") {
  Rng rng(50);
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = 4 + rng.uniform_below(30);
    std::vector<double> labels(k);
    for (double& y : labels) y = rng.normal();
    const int m = 1 + static_cast<int>(rng.uniform_below((k - 1) / 2));
    for (auto mode : {WinsorMode::upper_fit, WinsorMode::lower_fit}) {
      const auto w = winsorize(labels, m, mode);
      for (double y : w.labels) {
        CHECK(y >= w.low_anchor);
        CHECK(y <= w.high_anchor);
      }
    }
  }
}

TEST_CASE("epsilon_to_m picks the largest admissible m") {
  CHECK(epsilon_to_m(0.2, 9) == 1);
  CHECK(epsilon_to_m(0.5, 19) == 5);

  // Exhaustive check for epsilon = 0.25, k = 9: the largest m with
  // 2m/10 <= 0.25.
  int best = 0;
  for (int m = 1; m <= 4; ++m) {
    if (2.0 * m / 10.0 <= 0.25) best = m;
  }
  CHECK(best == 1);
  CHECK(epsilon_to_m(0.25, 9) == best);

  CHECK_THROWS(epsilon_to_m(0.05, 9));   // below 2/(k+1)
  CHECK_THROWS(epsilon_to_m(1.0, 9));
}

TEST_CASE("epsilon_to_m always satisfies 2m < k") {
  Rng rng(51);
  for (int t = 0; t < 200; ++t) {
    const int k = 3 + static_cast<int>(rng.uniform_below(100));
    const double lo = 2.0 / (k + 1);
    const double eps = lo + (1.0 - lo) * rng.uniform01() * 0.999;
    const int m = epsilon_to_m(eps, k);
    CHECK(m >= 1);
    CHECK(2 * m < k);
    CHECK(2.0 * m / (k + 1) <= eps + 1e-9);
  }
}

TEST_CASE("winsorized_test_label clamps per the order statistics") {
  const std::vector<double> labels = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  CHECK(winsorized_test_label(labels, 100.0, 1) == 9);
  CHECK(winsorized_test_label(labels, 1.5, 2) == 2);
  CHECK(winsorized_test_label(labels, 4.2, 2) == 4.2);
  CHECK_THROWS_WITH(winsorized_test_label(labels, 1.0, 5), "invalid m");
}

TEST_CASE("unbounded calibrators reproduce the step-by-step recipe") {
  Rng rng(52);
  for (int t = 0; t < 60; ++t) {
    const int m = 1 + static_cast<int>(rng.uniform_below(3));
    const std::size_t k = static_cast<std::size_t>(2 * m + 2) + rng.uniform_below(30);
    std::vector<double> scores(k), labels(k);
    for (std::size_t i = 0; i < k; ++i) {
      scores[i] = rng.uniform(-2.0, 2.0);
      labels[i] = rng.normal();
    }
    const auto cal = fit_calibrators_unbounded(scores, labels, m);
    for (int q = 0; q < 10; ++q) {
      const double r = rng.uniform(-3.0, 3.0);
      const auto got = cal.interval_at(r);
      const auto want = vareg::testing::interval_by_recipe(scores, labels, m, r);
      CHECK(std::fabs(got.lower - want.lower) <= 1e-9);
      CHECK(std::fabs(got.upper - want.upper) <= 1e-9);
      CHECK(got.lower <= got.upper + 1e-9);
    }
  }
}

TEST_CASE("hand-traced five-point recipe") {
  const std::vector<double> scores = {1, 2, 3, 4, 5};
  const std::vector<double> labels = {1, 2, 3, 4, 5};
  const auto cal = fit_calibrators_unbounded(scores, labels, 1);
  const auto want = vareg::testing::interval_by_recipe(scores, labels, 1, 2.5);
  const auto got = cal.interval_at(2.5);
  CHECK(got.lower == doctest::Approx(want.lower).epsilon(1e-12));
  CHECK(got.upper == doctest::Approx(want.upper).epsilon(1e-12));
}

TEST_CASE("constant labels give a degenerate interval everywhere") {
  const std::vector<double> scores = {1, 2, 3, 4, 5};
  const std::vector<double> labels = {4, 4, 4, 4, 4};
  const auto cal = fit_calibrators_unbounded(scores, labels, 1);
  for (double r : {-5.0, 1.0, 2.7, 10.0}) {
    const auto ivl = cal.interval_at(r);
    CHECK(ivl.lower == doctest::Approx(4.0));
    CHECK(ivl.upper == doctest::Approx(4.0));
  }
}

TEST_CASE("interval endpoints stay within the winsorization anchors") {
  Rng rng(53);
  for (int t = 0; t < 50; ++t) {
    const std::size_t k = 5 + rng.uniform_below(40);
    std::vector<double> scores(k), labels(k);
    for (std::size_t i = 0; i < k; ++i) {
      scores[i] = rng.uniform(-2.0, 2.0);
      labels[i] = rng.normal();
    }
    const auto cal = fit_calibrators_unbounded(scores, labels, 1);
    for (int q = 0; q < 20; ++q) {
      const auto ivl = cal.interval_at(rng.uniform(-3.0, 3.0));
      CHECK(ivl.lower >= cal.anchor_low - 1e-9);
      CHECK(ivl.upper <= cal.anchor_high + 1e-9);
      CHECK(ivl.lower <= ivl.upper + 1e-9);
    }
  }
}

TEST_CASE("fit_bounded on the two-point example") {
  const DataMatrix x = single_column({1, 2});
  const std::vector<double> y = {0, 1};
  const auto cal = fit_calibrators_bounded({{1, 2}}, y, 0.0, 1.0);
  const auto ivl = cal.interval_at(1.5);
  CHECK(ivl.lower == doctest::Approx(0.0));
  CHECK(ivl.upper == doctest::Approx(1.0));
}

TEST_CASE("fit_bounded validation") {
  const std::vector<double> scores = {1, 2};
  CHECK_THROWS(fit_calibrators_bounded(scores, {{0.0, 1.0}}, 1.0, 1.0));
  CHECK_THROWS_WITH(fit_calibrators_bounded(scores, {{0.0, 2.0}}, 0.0, 1.0),
                    "label violates declared bounds");
}

TEST_CASE("fit_bounded with all labels at the upper bound") {
  const std::vector<double> scores = {1, 2, 3};
  const std::vector<double> labels = {1, 1, 1};
  const auto cal = fit_calibrators_bounded(scores, labels, 0.0, 1.0);
  for (double r : {0.5, 2.0, 4.0}) {
    const auto ivl = cal.interval_at(r);
    CHECK(ivl.upper == doctest::Approx(1.0));
    CHECK(ivl.lower ==
          doctest::Approx(vareg::testing::refit_eval(scores, labels, r, 0.0)));
  }
}

TEST_CASE("bounded mode admits a single calibration point") {
  IvarConfig cfg;
  cfg.calibration_size = 1;
  cfg.bounds = {{0.0, 10.0}};
  cfg.split_seed = 3;
  const DataMatrix x = single_column({0.1, 0.5, 0.9, 0.3});
  const std::vector<double> y = {1.0, 5.0, 9.0, 3.0};
  const auto model = fit_bounded(x, y, identity_trainer(), cfg);
  const std::vector<double> probe = {0.4};
  const auto ivl = predict_interval(model, probe);
  CHECK(std::isfinite(ivl.lower));
  CHECK(std::isfinite(ivl.upper));
  CHECK(ivl.lower <= ivl.upper);
}

TEST_CASE("fit_unbounded end to end") {
  Rng rng(54);
  const std::size_t n = 60;
  DataMatrix x(n, 1);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x.at(i, 0) = rng.uniform(-2.0, 2.0);
    y[i] = x.at(i, 0) + 0.3 * rng.normal();
  }
  IvarConfig cfg;
  cfg.calibration_size = 20;
  cfg.winsor_m = 1;
  cfg.split_seed = 11;
  const auto model = fit_unbounded(x, y, identity_trainer(), cfg);

  // Purity: repeated queries agree; ordering holds everywhere.
  for (int q = 0; q < 100; ++q) {
    const std::vector<double> obj = {rng.uniform(-3.0, 3.0)};
    const auto a = predict_interval(model, obj);
    const auto b = predict_interval(model, obj);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
    CHECK(a.lower <= a.upper + 1e-9);
  }

  // Mode mix-ups are rejected.
  CHECK_THROWS(fit_bounded(x, y, identity_trainer(), cfg));
  IvarConfig bad = cfg;
  bad.winsor_m.reset();
  CHECK_THROWS(fit_unbounded(x, y, identity_trainer(), bad));
}

TEST_CASE("validity probe groups average to their selector") {
  Rng rng(55);
  for (int t = 0; t < 60; ++t) {
    const std::size_t bag_size = 4 + rng.uniform_below(6);
    std::vector<ScoredExample> bag(bag_size);
    for (auto& e : bag) e = {rng.normal(), rng.normal()};
    const auto res = validity_probe(bag, 1);
    std::size_t total = 0;
    for (const auto& g : res.groups) {
      CHECK(std::fabs(g.mean_winsorized_label - g.selector) <= 1e-9);
      total += g.count;
    }
    CHECK(total == bag_size);
  }
}

TEST_CASE("validity probe on a constant bag has a single group") {
  const std::vector<ScoredExample> bag = {{1, 3}, {2, 3}, {3, 3}, {4, 3}};
  const auto res = validity_probe(bag, 1);
  REQUIRE(res.groups.size() == 1);
  CHECK(res.groups[0].selector == doctest::Approx(3.0));
  CHECK(res.groups[0].count == 4);
}

TEST_CASE("validity probe rejects undersized bags") {
  const std::vector<ScoredExample> bag = {{1, 1}, {2, 2}, {3, 3}};
  CHECK_THROWS_WITH(validity_probe(bag, 1), "bag too small");
}

TEST_CASE("selector stays inside the held-out interval on random bags") {
  Rng rng(56);
  for (int t = 0; t < 200; ++t) {
    const std::size_t bag_size = 4 + rng.uniform_below(6);  // k in [3, 8]
    std::vector<ScoredExample> bag(bag_size);
    const bool tie_scores = t % 3 == 0;
    for (auto& e : bag) {
      const double s =
          tie_scores ? static_cast<double>(rng.uniform_below(3)) : rng.normal();
      e = {s, rng.normal()};
    }
    // Throws if any selector escapes its interval.
    const auto res = validity_probe(bag, 1);
    for (std::size_t i = 0; i < bag_size; ++i) {
      CHECK(res.selectors[i] >= res.intervals[i].lower - 1e-9);
      CHECK(res.selectors[i] <= res.intervals[i].upper + 1e-9);
    }
  }
}

TEST_CASE("bounded selector of the true label stays inside the interval") {
  // The fit to the calibration pairs plus (r, y_true) lands in [f_*, f^*].
  Rng rng(57);
  for (int t = 0; t < 200; ++t) {
    const std::size_t k = 2 + rng.uniform_below(7);
    std::vector<double> scores(k), labels(k);
    for (std::size_t i = 0; i < k; ++i) {
      scores[i] = rng.normal();
      labels[i] = rng.uniform01();
    }
    const auto cal = fit_calibrators_bounded(scores, labels, 0.0, 1.0);
    const double r = rng.normal();
    const double y_true = rng.uniform01();
    const double s = vareg::testing::refit_eval(scores, labels, r, y_true);
    const auto ivl = cal.interval_at(r);
    CHECK(s >= ivl.lower - 1e-9);
    CHECK(s <= ivl.upper + 1e-9);
  }
}

TEST_CASE("winsorized test label coverage at desk scale") {
  // P(Y != Y') <= 2m/(k+1) plus Monte Carlo slack.
  Rng rng(58);
  const int k = 19, m = 1, reps = 20000;
  int changed = 0;
  std::vector<double> labels(k);
  for (int t = 0; t < reps; ++t) {
    for (double& y : labels) y = rng.normal();
    const double test = rng.normal();
    if (winsorized_test_label(labels, test, m) != test) ++changed;
  }
  const double p = 2.0 * m / (k + 1);
  const double band = 3.0 * std::sqrt(p * (1 - p) / reps);
  CHECK(changed / static_cast<double>(reps) <= p + band);
}
