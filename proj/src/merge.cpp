#include "vareg/merge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vareg {

namespace {

// Validates the anchor ordering and returns the interval clamped into the
// anchors. Fitted endpoints may poke past an anchor by rounding noise only.
RegressionInterval checked_interval(const MergeInput& in) {
  if (!std::isfinite(in.y_low) || !std::isfinite(in.y_high) ||
      !std::isfinite(in.interval.lower) || !std::isfinite(in.interval.upper)) {
    throw std::invalid_argument("non-finite input");
  }
  const double scale =
      std::max({1.0, std::fabs(in.y_low), std::fabs(in.y_high)});
  const double tol = 1e-9 * scale;
  if (in.y_low > in.y_high + tol ||
      in.interval.lower > in.interval.upper + tol ||
      in.interval.lower < in.y_low - tol ||
      in.interval.upper > in.y_high + tol) {
    throw std::invalid_argument("interval not nested in anchors");
  }
  RegressionInterval ivl;
  ivl.lower = std::clamp(in.interval.lower, in.y_low, in.y_high);
  ivl.upper = std::clamp(in.interval.upper, ivl.lower, in.y_high);
  return ivl;
}

}  // namespace

double merge_exact(const MergeInput& in) {
  if (in.y_low == in.y_high &&
      in.interval.upper - in.interval.lower >
          1e-9 * std::max(1.0, std::fabs(in.y_low))) {
    throw std::invalid_argument("degenerate anchors");
  }
  const RegressionInterval ivl = checked_interval(in);
  const double a = in.y_low, b = in.y_high;
  const double p = ivl.lower, q = ivl.upper;
  if (!(a < b)) {
    return p;  // fully degenerate: everything collapsed to a point
  }
  const double y = (p * p - q * q + 2.0 * q * b - 2.0 * p * a) / (2.0 * (b - a));
  return std::clamp(y, p, q);
}

ApproxMerge merge_approx(const MergeInput& in) {
  const RegressionInterval ivl = checked_interval(in);
  const double p = ivl.lower, q = ivl.upper;
  const double w_low = p - in.y_low;
  const double w_high = in.y_high - q;
  const double denom = w_low + w_high;
  if (denom <= 0.0) {
    return {0.5 * (p + q), true};
  }
  const double y = (w_low * p + w_high * q) / denom;
  return {std::clamp(y, p, q), false};
}

double merge_point(const MergeInput& in, MergeMode mode) {
  return mode == MergeMode::exact ? merge_exact(in) : merge_approx(in).value;
}

}  // namespace vareg
