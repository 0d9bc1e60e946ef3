#ifndef VAREG_BASELINES_HPP
#define VAREG_BASELINES_HPP

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vareg/data.hpp"

namespace vareg {

// A trained base regressor. Immutable; prediction is a pure function of the
// trained state and the input, so rules are safe to share across threads.
class PredictionRule {
 public:
  virtual ~PredictionRule() = default;
  virtual double predict(std::span<const double> x) const = 0;
};

using RulePtr = std::shared_ptr<const PredictionRule>;

// Trains a rule on (rows, labels).
using Trainer =
    std::function<RulePtr(const DataMatrix&, std::span<const double>)>;

// Ordinary least squares with an intercept. Rank-deficient designs are solved
// in the minimum-norm sense.
RulePtr train_ols(const DataMatrix& rows, std::span<const double> labels);

// Ridge regression; the intercept is not penalized.
RulePtr train_ridge(const DataMatrix& rows, std::span<const double> labels,
                    double lambda);

// k-nearest-neighbours mean-label predictor (Euclidean distance, distance
// ties broken by row index).
RulePtr train_knn(const DataMatrix& rows, std::span<const double> labels,
                  int neighbors);

inline constexpr double kDefaultRidgeLambda = 1.0;
inline constexpr int kDefaultKnnNeighbors = 10;

// Trainer by name: "ols", "ridge" (lambda = 1.0) or "knn" (neighbors = 10).
Trainer make_trainer(const std::string& name);

// Per-feature affine transform fitted on training rows only. Constant columns
// keep stddev 1 so they pass through unchanged.
struct Standardizer {
  std::vector<double> means;
  std::vector<double> stddevs;
};

Standardizer fit_standardizer(const DataMatrix& rows);
DataMatrix apply_standardizer(const Standardizer& s, const DataMatrix& rows);

}  // namespace vareg

#endif  // VAREG_BASELINES_HPP
