#ifndef VAREG_DATAGEN_HPP
#define VAREG_DATAGEN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vareg/data.hpp"

namespace vareg {

enum class Scenario {
  bounded_logistic,
  linear_gaussian,
  nonlinear,
  heteroscedastic,
  heavy_tailed,
  outlier,
  sparse,
  covariate_shift,
  friedman1,
  friedman2,
  friedman3,
  csv_file,
};

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);
// The ten synthetic scenarios, in canonical order.
const std::vector<Scenario>& synthetic_scenarios();

struct DatasetSpec {
  Scenario scenario = Scenario::linear_gaussian;
  std::size_t n = 10000;
  std::size_t d = 10;
  double sigma = 1.0;  // noise level
  std::uint64_t seed = 0;
  double train_fraction = 0.8;

  // Scenario couplings; defaults follow the evaluation protocol.
  double outlier_prob = 0.01;   // p
  double tau_multiplier = 10.0; // tau = multiplier * sigma
  double nu_multiplier = 3.0;   // nu = multiplier * sigma
  std::size_t sparsity = 2;     // nonzero true coefficients
  double shift_mean = 1.0;      // test-object mean under covariate shift

  // csv_file scenario only.
  std::string csv_path;
  std::string label_column = "label";
};

struct Dataset {
  DataMatrix train_rows;
  std::vector<double> train_labels;
  DataMatrix test_rows;
  std::vector<double> test_labels;
  DatasetSpec provenance;
  double split_fraction = 0.8;
};

// Draws a dataset. Bit-identical for identical specs: all randomness comes
// from mt19937_64 streams derived from the seed (model / features / noise /
// split), with Gaussians via Box-Muller.
Dataset generate(const DatasetSpec& spec);

// Reads a CSV with a header line; every non-label column is a feature. The
// rows are then split train/test per the seed.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 std::uint64_t seed, double train_fraction = 0.8);

// Writes train rows then test rows with header f0,..,f{d-1},label, at full
// precision (round-trips bit-exactly through load_csv).
void save_csv(const std::string& path, const Dataset& data);

// Lower-level table reader shared by load_csv and the CLI.
struct CsvTable {
  std::vector<std::string> header;
  DataMatrix cells;
};
CsvTable read_csv_table(const std::string& path);

}  // namespace vareg

#endif  // VAREG_DATAGEN_HPP
