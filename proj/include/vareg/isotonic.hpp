#ifndef VAREG_ISOTONIC_HPP
#define VAREG_ISOTONIC_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace vareg {

// One calibration example: a base prediction (score) and its label.
struct ScoredExample {
  double score = 0.0;
  double label = 0.0;
};

// A vertex of the cumulative sum diagram: running (weight, weighted label) sums.
struct CsdPoint {
  double cum_weight = 0.0;
  double cum_label_sum = 0.0;
};

// Deduplicated, score-sorted view of a calibration set together with its
// cumulative sum diagram P_0 .. P_k' (P_0 = (0, 0)).
struct CsdSummary {
  std::vector<double> distinct_scores;     // strictly increasing
  std::vector<std::int64_t> weights;       // multiplicity of each distinct score
  std::vector<double> mean_labels;         // weighted mean label per distinct score
  std::vector<CsdPoint> cum_points;        // size() + 1 entries

  std::size_t size() const { return distinct_scores.size(); }
  std::int64_t total_weight() const;
  double min_mean_label() const;
  double max_mean_label() const;
};

// Solution of a least-squares isotonic (non-decreasing) fit.
struct IsotonicFit {
  std::vector<double> breakpoints;  // first distinct score of each block
  std::vector<double> values;       // block values, strictly increasing
  // Half-open [first, last) ranges of pooled distinct-score indices per block.
  std::vector<std::pair<std::size_t, std::size_t>> block_ranges;
  // Fitted value per input example, in the original input order.
  std::vector<double> fitted;
};

// Pool-adjacent-violators fit to (score, label) pairs. Tied scores are pooled
// into one weighted point before any violator merging, so the fit is a
// well-defined function of the score.
IsotonicFit pava_fit(std::span<const ScoredExample> examples);

// Sorts, deduplicates and accumulates the cumulative sum diagram.
CsdSummary build_csd(std::span<const ScoredExample> examples);

// Test-time calibrators f^* (upper) and f_* (lower) over a fixed calibration
// set. eval_upper(r) returns exactly the value obtained by refitting PAVA to
// the calibration pairs plus (r, y_pseudo_upper) and reading the fit at r;
// eval_lower is the mirror image with (r, y_pseudo_lower). Preprocessing is
// O(k) beyond the sort in build_csd, each eval is O(log k).
//
// The pseudo-labels must bracket the calibration labels
// (y_pseudo_lower <= every mean label <= y_pseudo_upper); that is the regime
// in which the one-extra-point refit reduces to a precomputed step function,
// and the only one the calibration recipes produce.
class CalibratorPair {
 public:
  CalibratorPair() = default;  // empty; obtain real ones from build_calibrator_pair

  double eval_upper(double r) const;
  double eval_lower(double r) const;

  double y_pseudo_lower() const { return pseudo_lower_; }
  double y_pseudo_upper() const { return pseudo_upper_; }
  const CsdSummary& csd() const { return csd_; }

  // Greatest-convex-minorant corners of the extended diagrams: the upper one
  // has P_{-1} = (-1, -y_pseudo_upper) prepended, the lower one has
  // P_{k'+1} = P_{k'} + (1, y_pseudo_lower) appended.
  const std::vector<CsdPoint>& upper_corners() const { return upper_corners_; }
  const std::vector<CsdPoint>& lower_corners() const { return lower_corners_; }

  friend CalibratorPair build_calibrator_pair(CsdSummary csd,
                                              double y_pseudo_lower,
                                              double y_pseudo_upper);

 private:
  CsdSummary csd_;
  double pseudo_lower_ = 0.0;
  double pseudo_upper_ = 0.0;
  // upper_step_[i] = f^*(r) for r in (r'_i, r'_{i+1}], 0-based, with
  // r'_0 = -inf; r beyond the last distinct score evaluates to pseudo_upper_.
  std::vector<double> upper_step_;
  // lower_step_[i] = f_*(r) for r in [r'_{i+1}, r'_{i+2}); r below the first
  // distinct score evaluates to pseudo_lower_.
  std::vector<double> lower_step_;
  std::vector<CsdPoint> upper_corners_;
  std::vector<CsdPoint> lower_corners_;
};

CalibratorPair build_calibrator_pair(CsdSummary csd, double y_pseudo_lower,
                                     double y_pseudo_upper);

}  // namespace vareg

#endif  // VAREG_ISOTONIC_HPP
