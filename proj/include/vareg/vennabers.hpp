#ifndef VAREG_VENNABERS_HPP
#define VAREG_VENNABERS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "vareg/baselines.hpp"
#include "vareg/data.hpp"
#include "vareg/isotonic.hpp"
#include "vareg/merge.hpp"

namespace vareg {

enum class WinsorMode { upper_fit, lower_fit };

// Calibration labels with the m most extreme values clamped to interior
// order statistics. The two modes are deliberately asymmetric:
//   upper_fit: low anchor = (m+1)th smallest, high anchor = mth largest;
//   lower_fit: low anchor = mth smallest, high anchor = (m+1)th largest.
struct WinsorizedLabels {
  std::vector<double> labels;  // clamped, original order
  double low_anchor = 0.0;     // y_*
  double high_anchor = 0.0;    // y^*
  WinsorMode mode = WinsorMode::upper_fit;
};

WinsorizedLabels winsorize(std::span<const double> labels, int m,
                           WinsorMode mode);

// Largest m with 2m/(k+1) <= epsilon, additionally capped at floor((k-1)/2).
// epsilon must lie in [2/(k+1), 1).
int epsilon_to_m(double epsilon, int k);

// Clamps a test label to the [mth smallest, mth largest] calibration labels.
double winsorized_test_label(std::span<const double> calibration_labels,
                             double y, int m);

// Uniform split of {0..n_examples-1} into a proper-training part and a
// calibration part of exactly k indices. Deterministic per seed.
struct TrainingSplit {
  std::vector<std::size_t> proper;
  std::vector<std::size_t> calibration;
};

TrainingSplit split_training(std::size_t n_examples, std::size_t k,
                             std::uint64_t seed);

// Configuration of an inductive Venn-Abers regressor. Exactly one of
// winsor_m (unbounded mode) and bounds (bounded mode) must be set.
struct IvarConfig {
  std::size_t calibration_size = 0;  // k
  std::optional<int> winsor_m;
  std::optional<std::pair<double, double>> bounds;  // (C_*, C^*)
  std::uint64_t split_seed = 0;
};

// The two test-time calibrators of a fitted regressor plus the anchors used
// when collapsing its intervals to points.
struct IvarCalibrators {
  CalibratorPair upper;  // queried through eval_upper
  CalibratorPair lower;  // queried through eval_lower
  double anchor_low = 0.0;
  double anchor_high = 0.0;

  RegressionInterval interval_at(double score) const {
    return {lower.eval_lower(score), upper.eval_upper(score)};
  }
};

// Core fitting given base predictions for the calibration set; this is the
// score-space part of the recipe, shared by the full fits and the cross-fold
// regressor.
IvarCalibrators fit_calibrators_unbounded(std::span<const double> scores,
                                          std::span<const double> labels,
                                          int m);
IvarCalibrators fit_calibrators_bounded(std::span<const double> scores,
                                        std::span<const double> labels,
                                        double c_low, double c_high);

struct FittedIvar {
  RulePtr rule;
  IvarCalibrators calibrators;
};

FittedIvar fit_unbounded(const DataMatrix& x, std::span<const double> y,
                         const Trainer& base, const IvarConfig& cfg);
FittedIvar fit_bounded(const DataMatrix& x, std::span<const double> y,
                       const Trainer& base, const IvarConfig& cfg);

RegressionInterval predict_interval(const FittedIvar& model,
                                    std::span<const double> x);

// Finite validity probe over a bag of k+1 scored examples: winsorize the bag
// symmetrically (the m largest to the (m+1)th largest, the m smallest to the
// (m+1)th smallest), fit one isotonic regression, and for each choice of test
// element record the fitted value S at its score and its winsorized label.
// Elements are grouped by S; each group's mean winsorized label equals S, and
// every S lies inside the interval of the regressor built on the other k
// elements (checked internally, violations throw).
struct ProbeGroup {
  double selector = 0.0;               // S
  double mean_winsorized_label = 0.0;  // average Y' over the group
  std::size_t count = 0;
};

struct ProbeResult {
  std::vector<ProbeGroup> groups;  // ascending by selector
  // Per test-element detail, indexed like the input bag.
  std::vector<double> selectors;
  std::vector<double> winsorized_labels;
  std::vector<RegressionInterval> intervals;
};

ProbeResult validity_probe(std::span<const ScoredExample> bag, int m);

}  // namespace vareg

#endif  // VAREG_VENNABERS_HPP
