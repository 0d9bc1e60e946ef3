#include "vareg/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vareg {

namespace {

void check_finite(std::span<const ScoredExample> examples) {
  if (examples.empty()) throw std::invalid_argument("empty calibration set");
  for (const auto& e : examples) {
    if (!std::isfinite(e.score) || !std::isfinite(e.label)) {
      throw std::invalid_argument("non-finite input");
    }
  }
}

// Indices of `examples` sorted by score; ties keep input order.
std::vector<std::size_t> sorted_order(std::span<const ScoredExample> examples) {
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return examples[a].score < examples[b].score;
  });
  return order;
}

double slope(const CsdPoint& a, const CsdPoint& b) {
  return (b.cum_label_sum - a.cum_label_sum) / (b.cum_weight - a.cum_weight);
}

double cross(const CsdPoint& o, const CsdPoint& a, const CsdPoint& b) {
  return (a.cum_weight - o.cum_weight) * (b.cum_label_sum - o.cum_label_sum) -
         (a.cum_label_sum - o.cum_label_sum) * (b.cum_weight - o.cum_weight);
}

// Is t strictly below the line through p1 and p2?
bool below(const CsdPoint& t, const CsdPoint& p1, const CsdPoint& p2) {
  const double m = slope(p1, p2);
  return t.cum_label_sum < p1.cum_label_sum + m * (t.cum_weight - p1.cum_weight);
}

}  // namespace

std::int64_t CsdSummary::total_weight() const {
  std::int64_t total = 0;
  for (std::int64_t w : weights) total += w;
  return total;
}

double CsdSummary::min_mean_label() const {
  return *std::min_element(mean_labels.begin(), mean_labels.end());
}

double CsdSummary::max_mean_label() const {
  return *std::max_element(mean_labels.begin(), mean_labels.end());
}

CsdSummary build_csd(std::span<const ScoredExample> examples) {
  check_finite(examples);
  const auto order = sorted_order(examples);

  CsdSummary csd;
  csd.distinct_scores.reserve(examples.size());
  csd.weights.reserve(examples.size());
  std::vector<double> label_sums;
  label_sums.reserve(examples.size());
  for (std::size_t idx : order) {
    const auto& e = examples[idx];
    if (!csd.distinct_scores.empty() && csd.distinct_scores.back() == e.score) {
      csd.weights.back() += 1;
      label_sums.back() += e.label;
    } else {
      csd.distinct_scores.push_back(e.score);
      csd.weights.push_back(1);
      label_sums.push_back(e.label);
    }
  }

  csd.mean_labels.resize(label_sums.size());
  csd.cum_points.reserve(label_sums.size() + 1);
  csd.cum_points.push_back({0.0, 0.0});
  for (std::size_t j = 0; j < label_sums.size(); ++j) {
    csd.mean_labels[j] = label_sums[j] / static_cast<double>(csd.weights[j]);
    const auto& prev = csd.cum_points.back();
    csd.cum_points.push_back({prev.cum_weight + static_cast<double>(csd.weights[j]),
                              prev.cum_label_sum + label_sums[j]});
  }
  return csd;
}

IsotonicFit pava_fit(std::span<const ScoredExample> examples) {
  check_finite(examples);
  const auto order = sorted_order(examples);

  // Pre-pool tied scores into weighted points.
  std::vector<double> scores, sums, weights;
  std::vector<std::size_t> distinct_of(examples.size());  // example -> distinct index
  for (std::size_t idx : order) {
    const auto& e = examples[idx];
    if (!scores.empty() && scores.back() == e.score) {
      sums.back() += e.label;
      weights.back() += 1.0;
    } else {
      scores.push_back(e.score);
      sums.push_back(e.label);
      weights.push_back(1.0);
    }
    distinct_of[idx] = scores.size() - 1;
  }

  struct Block {
    double sum, weight;
    std::size_t first, count;  // pooled distinct-score indices [first, first+count)
  };
  std::vector<Block> blocks;
  for (std::size_t j = 0; j < scores.size(); ++j) {
    blocks.push_back({sums[j], weights[j], j, 1});
    while (blocks.size() > 1) {
      const Block& prev = blocks[blocks.size() - 2];
      const Block& cur = blocks.back();
      if (prev.sum / prev.weight < cur.sum / cur.weight) break;
      Block merged = prev;
      merged.sum += cur.sum;
      merged.weight += cur.weight;
      merged.count += cur.count;
      blocks.pop_back();
      blocks.back() = merged;
    }
  }

  IsotonicFit fit;
  std::vector<std::size_t> block_of(scores.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Block& blk = blocks[b];
    fit.breakpoints.push_back(scores[blk.first]);
    fit.values.push_back(blk.sum / blk.weight);
    fit.block_ranges.emplace_back(blk.first, blk.first + blk.count);
    for (std::size_t j = blk.first; j < blk.first + blk.count; ++j) block_of[j] = b;
  }
  fit.fitted.resize(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    fit.fitted[i] = fit.values[block_of[distinct_of[i]]];
  }
  return fit;
}

// The step tables below realize the one-extra-point refits without refitting.
//
// Insert a test point with label u >= all mean labels after the first j
// distinct points. Excising the test point's unit slot from the augmented
// diagram translates everything to its left by (-1, -u); the refit value at
// the test point is then the slope of the bridge segment of the greatest
// convex minorant of
//     { P_i - (1, u) : i <= j }  union  { P_i : i >= j },
// the segment spanning the empty seam between the two chains. Sweeping j
// left to right maintains that minorant with a single stack: read the bridge
// slope, then push the next translated point from below. Because u dominates
// every label, inserting the test point anywhere in (r'_j, r'_{j+1}] pools it
// with the block of point j+1, so one value per seam covers the half-open
// interval including the tie at its right edge, and a test score beyond the
// last distinct score evaluates to u itself. The lower table mirrors this
// with d <= all mean labels and right-closed intervals flipped to
// left-closed.
CalibratorPair build_calibrator_pair(CsdSummary csd, double y_pseudo_lower,
                                     double y_pseudo_upper) {
  if (csd.size() == 0) throw std::invalid_argument("empty calibration set");
  if (!std::isfinite(y_pseudo_lower) || !std::isfinite(y_pseudo_upper)) {
    throw std::invalid_argument("non-finite input");
  }
  if (y_pseudo_lower > y_pseudo_upper) {
    throw std::invalid_argument("pseudo-label ordering violated");
  }
  const double lo_mean = csd.min_mean_label();
  const double hi_mean = csd.max_mean_label();
  const double tol = 1e-12 * std::max({1.0, std::fabs(lo_mean), std::fabs(hi_mean)});
  if (y_pseudo_lower > lo_mean + tol || y_pseudo_upper < hi_mean - tol) {
    throw std::invalid_argument(
        "pseudo-labels must bracket the calibration labels");
  }

  CalibratorPair pair;
  pair.pseudo_lower_ = y_pseudo_lower;
  pair.pseudo_upper_ = y_pseudo_upper;

  const std::size_t kp = csd.size();
  const auto& P = csd.cum_points;  // P[0..kp]
  const double u = y_pseudo_upper;
  const double d = y_pseudo_lower;

  const auto upper_virtual = [&](std::size_t i) {
    return CsdPoint{P[i].cum_weight - 1.0, P[i].cum_label_sum - u};
  };
  const auto lower_virtual = [&](std::size_t i) {
    return CsdPoint{P[i].cum_weight + 1.0, P[i].cum_label_sum + d};
  };

  // Upper sweep. Corners of the minorant of {P_{-1}, P_0, .., P_kp} first.
  {
    std::vector<CsdPoint> stack;
    stack.push_back(upper_virtual(0));  // P_{-1} = (-1, -u)
    stack.push_back(P[0]);
    for (std::size_t i = 1; i <= kp; ++i) {
      while (stack.size() > 1 &&
             cross(stack[stack.size() - 2], stack.back(), P[i]) <= 0.0) {
        stack.pop_back();
      }
      stack.push_back(P[i]);
    }
    pair.upper_corners_ = stack;

    std::vector<CsdPoint> sp(stack.rbegin(), stack.rend());  // back = seam side
    pair.upper_step_.resize(kp);
    for (std::size_t j = 1; j <= kp; ++j) {
      pair.upper_step_[j - 1] = slope(sp.back(), sp[sp.size() - 2]);
      const CsdPoint t = upper_virtual(j);
      if (!below(t, sp.back(), sp[sp.size() - 2])) continue;
      sp.pop_back();
      while (sp.size() > 1 && cross(t, sp.back(), sp[sp.size() - 2]) <= 0.0) {
        sp.pop_back();
      }
      sp.push_back(t);
    }
  }

  // Lower sweep, mirrored: corners of {P_0, .., P_kp, P_{kp+1}}.
  {
    std::vector<CsdPoint> stack;
    stack.push_back(lower_virtual(kp));  // P_{kp+1} = P_kp + (1, d)
    stack.push_back(P[kp]);
    for (std::size_t i = kp; i-- > 0;) {
      while (stack.size() > 1 &&
             cross(stack[stack.size() - 2], stack.back(), P[i]) >= 0.0) {
        stack.pop_back();
      }
      stack.push_back(P[i]);
    }
    pair.lower_corners_.assign(stack.rbegin(), stack.rend());  // left to right

    std::vector<CsdPoint> sp(stack.rbegin(), stack.rend());  // back = seam side
    pair.lower_step_.resize(kp);
    for (std::size_t j = kp; j >= 1; --j) {
      pair.lower_step_[j - 1] = slope(sp[sp.size() - 2], sp.back());
      const CsdPoint t = lower_virtual(j - 1);
      if (!below(t, sp[sp.size() - 2], sp.back())) continue;
      sp.pop_back();
      while (sp.size() > 1 && cross(t, sp.back(), sp[sp.size() - 2]) >= 0.0) {
        sp.pop_back();
      }
      sp.push_back(t);
    }
  }

  pair.csd_ = std::move(csd);
  return pair;
}

double CalibratorPair::eval_upper(double r) const {
  if (!std::isfinite(r)) throw std::invalid_argument("non-finite input");
  const auto& rs = csd_.distinct_scores;
  const auto it = std::lower_bound(rs.begin(), rs.end(), r);
  if (it == rs.end()) return pseudo_upper_;
  return upper_step_[static_cast<std::size_t>(it - rs.begin())];
}

double CalibratorPair::eval_lower(double r) const {
  if (!std::isfinite(r)) throw std::invalid_argument("non-finite input");
  const auto& rs = csd_.distinct_scores;
  const auto it = std::upper_bound(rs.begin(), rs.end(), r);
  if (it == rs.begin()) return pseudo_lower_;
  return lower_step_[static_cast<std::size_t>(it - rs.begin()) - 1];
}

}  // namespace vareg
