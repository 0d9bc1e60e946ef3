#include "vareg/vennabers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vareg/rng.hpp"

namespace vareg {

namespace {

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

void check_labels_finite(std::span<const double> labels) {
  for (double y : labels) {
    if (!std::isfinite(y)) throw std::invalid_argument("non-finite input");
  }
}

std::vector<ScoredExample> zip_examples(std::span<const double> scores,
                                        std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels disagree in length");
  }
  std::vector<ScoredExample> ex(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) ex[i] = {scores[i], labels[i]};
  return ex;
}

}  // namespace

WinsorizedLabels winsorize(std::span<const double> labels, int m,
                           WinsorMode mode) {
  const std::size_t k = labels.size();
  if (m < 1) throw std::invalid_argument("m must be positive");
  if (2 * static_cast<std::size_t>(m) >= k) {
    throw std::invalid_argument("winsorization requires 2m < k");
  }
  check_labels_finite(labels);
  const std::vector<double> s = sorted_copy(labels);

  WinsorizedLabels out;
  out.mode = mode;
  if (mode == WinsorMode::upper_fit) {
    out.low_anchor = s[static_cast<std::size_t>(m)];          // (m+1)th smallest
    out.high_anchor = s[k - static_cast<std::size_t>(m)];     // mth largest
  } else {
    out.low_anchor = s[static_cast<std::size_t>(m) - 1];      // mth smallest
    out.high_anchor = s[k - 1 - static_cast<std::size_t>(m)]; // (m+1)th largest
  }
  out.labels.reserve(k);
  for (double y : labels) {
    out.labels.push_back(std::clamp(y, out.low_anchor, out.high_anchor));
  }
  return out;
}

int epsilon_to_m(double epsilon, int k) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  const double lo = 2.0 / (k + 1);
  if (!(epsilon >= lo - 1e-12) || !(epsilon < 1.0)) {
    throw std::invalid_argument("epsilon outside [2/(k+1), 1)");
  }
  int m = static_cast<int>(std::floor(epsilon * (k + 1) / 2.0 + 1e-9));
  m = std::max(m, 1);
  m = std::min(m, (k - 1) / 2);
  if (m < 1) throw std::invalid_argument("k too small for any valid m");
  return m;
}

double winsorized_test_label(std::span<const double> calibration_labels,
                             double y, int m) {
  const std::size_t k = calibration_labels.size();
  if (m < 1 || 2 * static_cast<std::size_t>(m) >= k) {
    throw std::invalid_argument("invalid m");
  }
  if (!std::isfinite(y)) throw std::invalid_argument("non-finite input");
  check_labels_finite(calibration_labels);
  const std::vector<double> s = sorted_copy(calibration_labels);
  const double low = s[static_cast<std::size_t>(m) - 1];   // Y_(m)
  const double high = s[k - static_cast<std::size_t>(m)];  // Y_(k-m+1)
  return std::clamp(y, low, high);
}

TrainingSplit split_training(std::size_t n_examples, std::size_t k,
                             std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("calibration size must be positive");
  if (n_examples <= k) throw std::invalid_argument("calibration size too large");
  std::vector<std::size_t> perm(n_examples);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);

  TrainingSplit split;
  split.calibration.assign(perm.begin(), perm.begin() + k);
  split.proper.assign(perm.begin() + k, perm.end());
  std::sort(split.calibration.begin(), split.calibration.end());
  std::sort(split.proper.begin(), split.proper.end());
  return split;
}

IvarCalibrators fit_calibrators_unbounded(std::span<const double> scores,
                                          std::span<const double> labels,
                                          int m) {
  const WinsorizedLabels up = winsorize(labels, m, WinsorMode::upper_fit);
  const WinsorizedLabels low = winsorize(labels, m, WinsorMode::lower_fit);

  IvarCalibrators cal{
      build_calibrator_pair(build_csd(zip_examples(scores, up.labels)),
                            up.low_anchor, up.high_anchor),
      build_calibrator_pair(build_csd(zip_examples(scores, low.labels)),
                            low.low_anchor, low.high_anchor),
      low.low_anchor, up.high_anchor};
  return cal;
}

IvarCalibrators fit_calibrators_bounded(std::span<const double> scores,
                                        std::span<const double> labels,
                                        double c_low, double c_high) {
  if (!(c_low < c_high)) throw std::invalid_argument("bounds must satisfy C_* < C^*");
  check_labels_finite(labels);
  for (double y : labels) {
    if (y < c_low || y > c_high) {
      throw std::invalid_argument("label violates declared bounds");
    }
  }
  CalibratorPair pair = build_calibrator_pair(
      build_csd(zip_examples(scores, labels)), c_low, c_high);
  return IvarCalibrators{pair, pair, c_low, c_high};
}

namespace {

FittedIvar fit_with_split(const DataMatrix& x, std::span<const double> y,
                          const Trainer& base, const IvarConfig& cfg,
                          bool bounded) {
  if (x.rows != y.size()) {
    throw std::invalid_argument("rows and labels disagree in length");
  }
  const TrainingSplit split =
      split_training(x.rows, cfg.calibration_size, cfg.split_seed);

  const DataMatrix proper_x = x.select(split.proper);
  const std::vector<double> proper_y = select(y, split.proper);
  RulePtr rule = base(proper_x, proper_y);

  std::vector<double> cal_scores, cal_labels;
  cal_scores.reserve(split.calibration.size());
  for (std::size_t i : split.calibration) {
    cal_scores.push_back(rule->predict(x.row(i)));
    cal_labels.push_back(y[i]);
  }

  FittedIvar model;
  model.rule = std::move(rule);
  if (bounded) {
    model.calibrators = fit_calibrators_bounded(
        cal_scores, cal_labels, cfg.bounds->first, cfg.bounds->second);
  } else {
    model.calibrators =
        fit_calibrators_unbounded(cal_scores, cal_labels, *cfg.winsor_m);
  }
  return model;
}

}  // namespace

FittedIvar fit_unbounded(const DataMatrix& x, std::span<const double> y,
                         const Trainer& base, const IvarConfig& cfg) {
  if (!cfg.winsor_m || cfg.bounds) {
    throw std::invalid_argument("config is not in unbounded mode");
  }
  return fit_with_split(x, y, base, cfg, /*bounded=*/false);
}

FittedIvar fit_bounded(const DataMatrix& x, std::span<const double> y,
                       const Trainer& base, const IvarConfig& cfg) {
  if (!cfg.bounds || cfg.winsor_m) {
    throw std::invalid_argument("config is not in bounded mode");
  }
  return fit_with_split(x, y, base, cfg, /*bounded=*/true);
}

RegressionInterval predict_interval(const FittedIvar& model,
                                    std::span<const double> x) {
  return model.calibrators.interval_at(model.rule->predict(x));
}

ProbeResult validity_probe(std::span<const ScoredExample> bag, int m) {
  const std::size_t n = bag.size();  // n = k + 1
  if (m < 1 || 2 * static_cast<std::size_t>(m) >= n - 1 || n < 2) {
    throw std::invalid_argument("bag too small");
  }

  // Symmetric recipe: one winsorization and one fit serve all test choices,
  // since neither depends on which element plays the test role.
  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = bag[i].label;
  const std::vector<double> s = sorted_copy(labels);
  const double low = s[static_cast<std::size_t>(m)];          // (m+1)th smallest
  const double high = s[n - 1 - static_cast<std::size_t>(m)]; // (m+1)th largest

  std::vector<ScoredExample> moderated(bag.begin(), bag.end());
  for (auto& e : moderated) e.label = std::clamp(e.label, low, high);
  const IsotonicFit fit = pava_fit(moderated);

  ProbeResult result;
  result.selectors = fit.fitted;
  result.winsorized_labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.winsorized_labels[i] = moderated[i].label;
  }

  // Intervals of the regressor fitted to the other k elements.
  result.intervals.resize(n);
  std::vector<double> rest_scores(n - 1), rest_labels(n - 1);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t w = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == t) continue;
      rest_scores[w] = bag[i].score;
      rest_labels[w] = bag[i].label;
      ++w;
    }
    const IvarCalibrators cal =
        fit_calibrators_unbounded(rest_scores, rest_labels, m);
    result.intervals[t] = cal.interval_at(bag[t].score);
    const double sel = result.selectors[t];
    if (sel < result.intervals[t].lower - 1e-9 ||
        sel > result.intervals[t].upper + 1e-9) {
      throw std::logic_error("selector escaped the regression interval");
    }
  }

  // Group by selector value. Values of distinct solution blocks are strictly
  // increasing, so exact equality recovers the level sets.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return result.selectors[a] < result.selectors[b];
  });
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < n && result.selectors[order[j]] == result.selectors[order[i]]) {
      sum += result.winsorized_labels[order[j]];
      ++j;
    }
    result.groups.push_back({result.selectors[order[i]],
                             sum / static_cast<double>(j - i), j - i});
    i = j;
  }
  return result;
}

}  // namespace vareg
