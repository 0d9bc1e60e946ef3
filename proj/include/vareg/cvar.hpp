#ifndef VAREG_CVAR_HPP
#define VAREG_CVAR_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "vareg/merge.hpp"
#include "vareg/vennabers.hpp"

namespace vareg {

struct CvarConfig {
  int folds = 10;  // K
  int winsor_m = 1;
  MergeMode merge_mode = MergeMode::approx;
  std::uint64_t fold_seed = 0;
};

// Cross Venn-Abers regressor: one regressor per fold (the fold is its
// calibration set, the rest its proper training set); predictions average the
// merged per-fold interval estimates.
struct CvarModel {
  std::vector<FittedIvar> fold_models;
  std::vector<std::vector<std::size_t>> folds;
  CvarConfig config;
};

CvarModel fit_cvar(const DataMatrix& x, std::span<const double> y,
                   const Trainer& base, const CvarConfig& cfg);

double predict_point(const CvarModel& model, std::span<const double> x);

}  // namespace vareg

#endif  // VAREG_CVAR_HPP
