#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "support/oracle.hpp"
#include "vareg/isotonic.hpp"
#include "vareg/rng.hpp"

using namespace vareg;

namespace {

std::vector<ScoredExample> zip(const std::vector<double>& s,
                               const std::vector<double>& y) {
  std::vector<ScoredExample> ex(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) ex[i] = {s[i], y[i]};
  return ex;
}

struct RandomInstance {
  std::vector<double> scores;
  std::vector<double> labels;
  double pseudo_low = 0.0;
  double pseudo_high = 0.0;
};

RandomInstance random_instance(Rng& rng, std::size_t kmax, bool tie_heavy) {
  RandomInstance inst;
  const std::size_t k = 1 + rng.uniform_below(kmax);
  for (std::size_t i = 0; i < k; ++i) {
    const double score = tie_heavy
                             ? static_cast<double>(rng.uniform_below(k / 2 + 1))
                             : rng.uniform(-2.0, 2.0);
    inst.scores.push_back(score);
    inst.labels.push_back(rng.normal());
  }
  const auto [lo, hi] =
      std::minmax_element(inst.labels.begin(), inst.labels.end());
  // Sometimes exactly at the extreme label, sometimes beyond it.
  inst.pseudo_high = *hi + (rng.uniform01() < 0.5 ? 0.0 : rng.uniform(0.0, 2.0));
  inst.pseudo_low = *lo - (rng.uniform01() < 0.5 ? 0.0 : rng.uniform(0.0, 2.0));
  return inst;
}

std::vector<double> query_points(Rng& rng, const RandomInstance& inst) {
  std::vector<double> qs;
  for (int i = 0; i < 6; ++i) qs.push_back(rng.uniform(-3.0, 3.0));
  // Exact ties and both out-of-range sides.
  qs.push_back(inst.scores[rng.uniform_below(inst.scores.size())]);
  const auto [lo, hi] = std::minmax_element(inst.scores.begin(), inst.scores.end());
  qs.push_back(*lo);
  qs.push_back(*hi);
  qs.push_back(*lo - 1.5);
  qs.push_back(*hi + 1.5);
  return qs;
}

}  // namespace

TEST_CASE("pava_fit on already isotonic data is the identity") {
  const auto fit = pava_fit(zip({1, 2, 3}, {1, 2, 3}));
  CHECK(fit.fitted == std::vector<double>{1, 2, 3});
  CHECK(fit.values == std::vector<double>{1, 2, 3});
  CHECK(fit.breakpoints == std::vector<double>{1, 2, 3});
}

TEST_CASE("pava_fit pools a violating pair to its mean") {
  const auto fit = pava_fit(zip({1, 2}, {3, 1}));
  CHECK(fit.fitted == std::vector<double>{2, 2});
  CHECK(fit.values == std::vector<double>{2});
  REQUIRE(fit.block_ranges.size() == 1);
  CHECK(fit.block_ranges[0] == std::pair<std::size_t, std::size_t>{0, 2});
}

TEST_CASE("pava_fit matches exhaustive partition search") {
  const auto fit = pava_fit(zip({1, 2, 3, 4}, {1, 3, 2, 4}));
  CHECK(fit.fitted == std::vector<double>{1, 2.5, 2.5, 4});

  const auto brute = vareg::testing::exhaustive_isotonic(
      std::vector<double>{1, 3, 2, 4});
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(fit.fitted[i] == doctest::Approx(brute[i]).epsilon(1e-12));
  }

  Rng rng(41);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng.uniform_below(9);
    std::vector<double> scores(n), labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(i);  // distinct, sorted
      labels[i] = rng.normal();
    }
    const auto got = pava_fit(zip(scores, labels));
    const auto want = vareg::testing::exhaustive_isotonic(labels);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(got.fitted[i] == doctest::Approx(want[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("pava_fit input validation") {
  CHECK_THROWS_WITH(pava_fit({}), "empty calibration set");
  const std::vector<ScoredExample> bad = {{1.0, std::nan("")}};
  CHECK_THROWS_WITH(pava_fit(bad), "non-finite input");
}

TEST_CASE("pava_fit preserves the total label sum and is idempotent") {
  Rng rng(42);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 1 + rng.uniform_below(30);
    std::vector<ScoredExample> ex(n);
    double total = 0.0;
    for (auto& e : ex) {
      e = {rng.uniform(0.0, 4.0), rng.normal()};
      total += e.label;
    }
    const auto fit = pava_fit(ex);
    double fitted_total = 0.0;
    for (double v : fit.fitted) fitted_total += v;
    CHECK(fitted_total == doctest::Approx(total).epsilon(1e-9));

    // Refit of the fitted values returns them unchanged.
    std::vector<ScoredExample> again(n);
    for (std::size_t i = 0; i < n; ++i) again[i] = {ex[i].score, fit.fitted[i]};
    const auto fit2 = pava_fit(again);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(fit2.fitted[i] == doctest::Approx(fit.fitted[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("pava_fit block values are weighted means of pooled labels") {
  Rng rng(43);
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 1 + rng.uniform_below(25);
    std::vector<ScoredExample> ex(n);
    for (auto& e : ex) {
      e = {static_cast<double>(rng.uniform_below(8)), rng.normal()};
    }
    const auto fit = pava_fit(ex);
    for (std::size_t b = 0; b < fit.values.size(); ++b) {
      if (b > 0) CHECK(fit.values[b] > fit.values[b - 1]);
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& e : ex) {
        if (std::fabs(fit.fitted[&e - ex.data()] - fit.values[b]) == 0.0) {
          sum += e.label;
          ++count;
        }
      }
      REQUIRE(count > 0);
      CHECK(fit.values[b] ==
            doctest::Approx(sum / static_cast<double>(count)).epsilon(1e-9));
    }
  }
}

TEST_CASE("pava_fit is monotone in the labels") {
  // Pointwise larger labels never lower any fitted value.
  Rng rng(44);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.uniform_below(20);
    std::vector<ScoredExample> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = rng.uniform(0.0, 5.0);
      const double y = rng.normal();
      a[i] = {s, y};
      b[i] = {s, y + rng.uniform01() * 2.0};
    }
    const auto fa = pava_fit(a);
    const auto fb = pava_fit(b);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(fa.fitted[i] <= fb.fitted[i] + 1e-9);
    }
  }
}

TEST_CASE("build_csd accumulates duplicates") {
  const auto csd = build_csd(zip({1, 1, 2}, {0, 2, 5}));
  CHECK(csd.size() == 2);
  CHECK(csd.weights == std::vector<std::int64_t>{2, 1});
  CHECK(csd.mean_labels == std::vector<double>{1, 5});
  REQUIRE(csd.cum_points.size() == 3);
  CHECK(csd.cum_points[0].cum_weight == 0);
  CHECK(csd.cum_points[0].cum_label_sum == 0);
  CHECK(csd.cum_points[1].cum_weight == 2);
  CHECK(csd.cum_points[1].cum_label_sum == 2);
  CHECK(csd.cum_points[2].cum_weight == 3);
  CHECK(csd.cum_points[2].cum_label_sum == 7);
}

TEST_CASE("build_csd singleton") {
  const auto csd = build_csd(zip({1}, {7}));
  CHECK(csd.size() == 1);
  CHECK(csd.cum_points.back().cum_weight == 1);
  CHECK(csd.cum_points.back().cum_label_sum == 7);
}

TEST_CASE("build_csd invariants on random input") {
  Rng rng(45);
  std::vector<ScoredExample> ex(1000);
  double label_sum = 0.0;
  for (auto& e : ex) {
    e = {static_cast<double>(rng.uniform_below(200)), rng.normal()};
    label_sum += e.label;
  }
  const auto csd = build_csd(ex);
  CHECK(csd.total_weight() == 1000);
  CHECK(csd.cum_points.back().cum_weight == 1000);
  CHECK(csd.cum_points.back().cum_label_sum ==
        doctest::Approx(label_sum).epsilon(1e-12));
  for (std::size_t j = 1; j < csd.size(); ++j) {
    CHECK(csd.distinct_scores[j] > csd.distinct_scores[j - 1]);
  }
  for (std::size_t j = 0; j < csd.size(); ++j) {
    const double dw = csd.cum_points[j + 1].cum_weight - csd.cum_points[j].cum_weight;
    const double dy =
        csd.cum_points[j + 1].cum_label_sum - csd.cum_points[j].cum_label_sum;
    CHECK(dw == static_cast<double>(csd.weights[j]));
    CHECK(dy == doctest::Approx(csd.weights[j] * csd.mean_labels[j]).epsilon(1e-12));
  }
}

TEST_CASE("calibrator pair on the two-point example") {
  const auto pair = build_calibrator_pair(build_csd(zip({1, 2}, {0, 1})), 0.0, 1.0);
  CHECK(pair.eval_upper(1.5) == doctest::Approx(1.0));
  CHECK(pair.eval_lower(1.5) == doctest::Approx(0.0));
}

TEST_CASE("calibrator pair with one point and equal pseudo-labels is constant") {
  const auto pair = build_calibrator_pair(build_csd(zip({1}, {5})), 5.0, 5.0);
  for (double r : {-10.0, 0.0, 1.0, 3.0, 100.0}) {
    CHECK(pair.eval_upper(r) == doctest::Approx(5.0));
    CHECK(pair.eval_lower(r) == doctest::Approx(5.0));
  }
}

TEST_CASE("calibrator pair validation") {
  const auto csd = build_csd(zip({1, 2}, {0, 1}));
  CHECK_THROWS_WITH(build_calibrator_pair(csd, 1.0, 0.0),
                    "pseudo-label ordering violated");
  CHECK_THROWS_WITH(build_calibrator_pair(csd, 0.0, 0.5),
                    "pseudo-labels must bracket the calibration labels");
  const auto pair = build_calibrator_pair(csd, 0.0, 1.0);
  CHECK_THROWS_WITH((void)pair.eval_upper(std::nan("")), "non-finite input");
  CHECK_THROWS_WITH((void)pair.eval_lower(std::nan("")), "non-finite input");
}

TEST_CASE("calibrator evaluations match the refit oracle") {
  Rng rng(46);
  int checked = 0;
  for (int t = 0; t < 500; ++t) {
    const auto inst = random_instance(rng, 50, t % 2 == 0);
    const auto pair = build_calibrator_pair(
        build_csd(zip(inst.scores, inst.labels)), inst.pseudo_low, inst.pseudo_high);
    for (double r : query_points(rng, inst)) {
      const double up = pair.eval_upper(r);
      const double low = pair.eval_lower(r);
      CHECK(std::fabs(up - vareg::testing::refit_eval(inst.scores, inst.labels,
                                                      r, inst.pseudo_high)) <= 1e-9);
      CHECK(std::fabs(low - vareg::testing::refit_eval(inst.scores, inst.labels,
                                                       r, inst.pseudo_low)) <= 1e-9);
      CHECK(low <= up + 1e-9);
      ++checked;
    }
  }
  CHECK(checked > 5000);
}

TEST_CASE("a calibrator pair can be queried from many threads") {
  Rng rng(90);
  const auto inst = random_instance(rng, 200, false);
  const auto pair = build_calibrator_pair(
      build_csd(zip(inst.scores, inst.labels)), inst.pseudo_low, inst.pseudo_high);

  std::vector<double> queries(512);
  for (double& q : queries) q = rng.uniform(-3.0, 3.0);
  std::vector<double> expected(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    expected[i] = pair.eval_upper(queries[i]) + pair.eval_lower(queries[i]);
  }

  std::vector<int> mismatches(4, 0);
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = 0; i < queries.size(); ++i) {
        const double got = pair.eval_upper(queries[i]) + pair.eval_lower(queries[i]);
        if (got != expected[i]) ++mismatches[static_cast<std::size_t>(w)];
      }
    });
  }
  for (auto& t : workers) t.join();
  for (int m : mismatches) CHECK(m == 0);
}

TEST_CASE("out-of-range queries read the extended blocks") {
  Rng rng(47);
  for (int t = 0; t < 50; ++t) {
    const auto inst = random_instance(rng, 20, false);
    const auto pair = build_calibrator_pair(
        build_csd(zip(inst.scores, inst.labels)), inst.pseudo_low, inst.pseudo_high);
    const auto [lo, hi] = std::minmax_element(inst.scores.begin(), inst.scores.end());

    // Below every score the upper fit reads the leftmost extended block,
    // whose pooled value is the first corner slope of the extended diagram.
    const double below_all = *lo - 1.0;
    const auto& uc = pair.upper_corners();
    REQUIRE(uc.size() >= 2);
    const double first_slope = (uc[1].cum_label_sum - uc[0].cum_label_sum) /
                               (uc[1].cum_weight - uc[0].cum_weight);
    CHECK(pair.eval_upper(below_all) == doctest::Approx(first_slope).epsilon(1e-12));
    CHECK(std::fabs(pair.eval_upper(below_all) -
                    vareg::testing::refit_eval(inst.scores, inst.labels,
                                               below_all, inst.pseudo_high)) <= 1e-9);

    // Above every score the lower fit reads the rightmost extended block.
    const double above_all = *hi + 1.0;
    const auto& lc = pair.lower_corners();
    REQUIRE(lc.size() >= 2);
    const auto& a = lc[lc.size() - 2];
    const auto& b = lc[lc.size() - 1];
    const double last_slope =
        (b.cum_label_sum - a.cum_label_sum) / (b.cum_weight - a.cum_weight);
    CHECK(pair.eval_lower(above_all) == doctest::Approx(last_slope).epsilon(1e-12));
    CHECK(std::fabs(pair.eval_lower(above_all) -
                    vareg::testing::refit_eval(inst.scores, inst.labels,
                                               above_all, inst.pseudo_low)) <= 1e-9);
  }
}
