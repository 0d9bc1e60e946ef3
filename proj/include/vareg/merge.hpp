#ifndef VAREG_MERGE_HPP
#define VAREG_MERGE_HPP

namespace vareg {

// A regression interval [lower, upper].
struct RegressionInterval {
  double lower = 0.0;
  double upper = 0.0;
};

// Interval plus the ambient anchors it lives in:
// y_low <= interval.lower <= interval.upper <= y_high.
struct MergeInput {
  double y_low = 0.0;
  double y_high = 0.0;
  RegressionInterval interval;
};

enum class MergeMode { exact, approx };

// Minimax point estimate: the unique value equalizing the worst-case excess
// squared losses against the two anchors. Always lies in the interval.
double merge_exact(const MergeInput& in);

struct ApproxMerge {
  double value = 0.0;
  bool midpoint_fallback = false;  // set when both weights vanished
};

// Weighted-average approximation of the minimax point. Falls back to the
// interval midpoint when the interval coincides with the anchors.
ApproxMerge merge_approx(const MergeInput& in);

double merge_point(const MergeInput& in, MergeMode mode);

}  // namespace vareg

#endif  // VAREG_MERGE_HPP
