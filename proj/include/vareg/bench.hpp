#ifndef VAREG_BENCH_HPP
#define VAREG_BENCH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vareg/datagen.hpp"
#include "vareg/merge.hpp"

namespace vareg {

enum class Method { none, cvar };

struct MethodSpec {
  Method method = Method::none;
  int winsor_m = 1;
  int folds = 10;
  MergeMode merge = MergeMode::approx;

  std::string name() const;  // "none" or "cvar-m<m>"
};

enum class ReportFormat { csv, markdown };

struct BenchConfig {
  std::vector<DatasetSpec> datasets;  // per-dataset seeds are overridden per trial
  std::vector<std::string> bases;     // "ols", "ridge", "knn"
  std::vector<MethodSpec> methods;
  int trials = 20;
  std::uint64_t base_seed = 2024;
  ReportFormat format = ReportFormat::csv;
  int jobs = 1;
};

struct BenchCell {
  std::string dataset;
  std::string base;
  std::string method;
  double mean_rmse = 0.0;
  double sem = 0.0;  // sample standard deviation / sqrt(trials); 0 for one trial
  int trials = 0;
  std::vector<double> raw_rmse;  // per-trial values, trial order
};

struct BenchReport {
  std::vector<BenchCell> cells;
  std::vector<std::string> notes;  // defaults and parameters worth recording
};

// One seeded experiment: draw the dataset, standardize features on training
// statistics, train/calibrate, return test RMSE. The same seed yields the
// same dataset for every method, so methods are compared on equal footing.
double run_trial(const DatasetSpec& spec, const std::string& base,
                 const MethodSpec& method, std::uint64_t seed);

BenchReport run_bench(const BenchConfig& cfg);

std::string render_report(const BenchReport& report, ReportFormat format);

double rmse(std::span<const double> predictions, std::span<const double> truths);

}  // namespace vareg

#endif  // VAREG_BENCH_HPP
