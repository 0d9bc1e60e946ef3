#include "vareg/cvar.hpp"

#include <numeric>
#include <stdexcept>

#include "vareg/rng.hpp"

namespace vareg {

CvarModel fit_cvar(const DataMatrix& x, std::span<const double> y,
                   const Trainer& base, const CvarConfig& cfg) {
  if (cfg.folds < 2) throw std::invalid_argument("folds must be at least 2");
  if (cfg.winsor_m < 1) throw std::invalid_argument("m must be positive");
  if (x.rows != y.size()) {
    throw std::invalid_argument("rows and labels disagree in length");
  }
  const std::size_t n = x.rows;
  const auto k = static_cast<std::size_t>(cfg.folds);
  const auto min_fold = static_cast<std::size_t>(2 * cfg.winsor_m + 1);
  if (n < k * min_fold) {
    throw std::invalid_argument("too few examples for the requested folds");
  }

  // Uniform permutation, then contiguous slices; the remainder goes to the
  // leading folds so sizes differ by at most one.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(cfg.fold_seed);
  rng.shuffle(perm);

  CvarModel model;
  model.config = cfg;
  model.folds.resize(k);
  const std::size_t base_size = n / k;
  const std::size_t remainder = n % k;
  std::size_t offset = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base_size + (f < remainder ? 1 : 0);
    model.folds[f].assign(perm.begin() + offset, perm.begin() + offset + size);
    std::sort(model.folds[f].begin(), model.folds[f].end());
    offset += size;
  }

  model.fold_models.reserve(k);
  std::vector<char> in_fold(n, 0);
  for (std::size_t f = 0; f < k; ++f) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (std::size_t i : model.folds[f]) in_fold[i] = 1;
    std::vector<std::size_t> rest;
    rest.reserve(n - model.folds[f].size());
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_fold[i]) rest.push_back(i);
    }

    const DataMatrix proper_x = x.select(rest);
    const std::vector<double> proper_y = select(y, rest);
    RulePtr rule = base(proper_x, proper_y);

    std::vector<double> scores, labels;
    scores.reserve(model.folds[f].size());
    for (std::size_t i : model.folds[f]) {
      scores.push_back(rule->predict(x.row(i)));
      labels.push_back(y[i]);
    }
    FittedIvar ivar;
    ivar.rule = std::move(rule);
    ivar.calibrators = fit_calibrators_unbounded(scores, labels, cfg.winsor_m);
    model.fold_models.push_back(std::move(ivar));
  }
  return model;
}

double predict_point(const CvarModel& model, std::span<const double> x) {
  if (model.fold_models.empty()) throw std::invalid_argument("model not fitted");
  double sum = 0.0;
  for (const FittedIvar& ivar : model.fold_models) {
    const RegressionInterval ivl = predict_interval(ivar, x);
    const MergeInput in{ivar.calibrators.anchor_low,
                        ivar.calibrators.anchor_high, ivl};
    sum += merge_point(in, model.config.merge_mode);
  }
  return sum / static_cast<double>(model.fold_models.size());
}

}  // namespace vareg
