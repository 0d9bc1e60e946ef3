#include "vareg/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "vareg/rng.hpp"

namespace vareg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Sub-stream tags hung off the dataset seed.
enum : std::uint64_t { kModelStream = 1, kFeatureStream = 2, kNoiseStream = 3, kSplitStream = 4 };

struct NamedScenario {
  Scenario scenario;
  const char* name;
};

constexpr NamedScenario kScenarios[] = {
    {Scenario::bounded_logistic, "bounded-logistic"},
    {Scenario::linear_gaussian, "linear-gaussian"},
    {Scenario::nonlinear, "nonlinear"},
    {Scenario::heteroscedastic, "heteroscedastic"},
    {Scenario::heavy_tailed, "heavy-tailed"},
    {Scenario::outlier, "outlier"},
    {Scenario::sparse, "sparse"},
    {Scenario::covariate_shift, "covariate-shift"},
    {Scenario::friedman1, "friedman1"},
    {Scenario::friedman2, "friedman2"},
    {Scenario::friedman3, "friedman3"},
    {Scenario::csv_file, "csv-file"},
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::string scenario_name(Scenario s) {
  for (const auto& entry : kScenarios) {
    if (entry.scenario == s) return entry.name;
  }
  throw std::invalid_argument("unknown scenario");
}

Scenario parse_scenario(const std::string& name) {
  for (const auto& entry : kScenarios) {
    if (name == entry.name) return entry.scenario;
  }
  throw std::invalid_argument("unknown scenario: " + name);
}

const std::vector<Scenario>& synthetic_scenarios() {
  static const std::vector<Scenario> all = {
      Scenario::bounded_logistic, Scenario::linear_gaussian,
      Scenario::nonlinear,        Scenario::heteroscedastic,
      Scenario::heavy_tailed,     Scenario::outlier,
      Scenario::sparse,           Scenario::covariate_shift,
      Scenario::friedman1,        Scenario::friedman2,
      Scenario::friedman3};
  return all;
}

namespace {

// Generative equations, one block per scenario. Objects are x ~ N(0, I_d)
// and weights w ~ N(0, I_d) unless stated otherwise; sigma parametrizes the
// label noise throughout.
class Generator {
 public:
  explicit Generator(const DatasetSpec& spec)
      : spec_(spec),
        model_rng_(mix_seed(spec.seed, kModelStream)),
        feature_rng_(mix_seed(spec.seed, kFeatureStream)),
        noise_rng_(mix_seed(spec.seed, kNoiseStream)) {}

  // Feature count actually generated; the friedman2/3 surfaces are defined on
  // exactly four inputs.
  std::size_t dims() const {
    switch (spec_.scenario) {
      case Scenario::friedman2:
      case Scenario::friedman3:
        return 4;
      default:
        return spec_.d;
    }
  }

  void draw_model() {
    const std::size_t d = dims();
    weights_.assign(d, 0.0);
    switch (spec_.scenario) {
      case Scenario::sparse: {
        // Sparse true coefficients: a random support of `sparsity` features.
        if (spec_.sparsity > d) throw std::invalid_argument("sparsity exceeds d");
        std::vector<std::size_t> idx(d);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        model_rng_.shuffle(idx);
        for (std::size_t j = 0; j < spec_.sparsity; ++j) {
          weights_[idx[j]] = model_rng_.normal();
        }
        break;
      }
      case Scenario::friedman1:
      case Scenario::friedman2:
      case Scenario::friedman3:
        break;  // fixed surfaces, no weight vector
      default:
        for (double& w : weights_) w = model_rng_.normal();
    }
  }

  std::vector<double> draw_object(bool test_row) {
    const std::size_t d = dims();
    std::vector<double> x(d);
    switch (spec_.scenario) {
      case Scenario::friedman1:
        for (double& v : x) v = feature_rng_.uniform01();
        break;
      case Scenario::friedman2:
      case Scenario::friedman3:
        x[0] = feature_rng_.uniform(0.0, 100.0);
        x[1] = feature_rng_.uniform(40.0 * kPi, 560.0 * kPi);
        x[2] = feature_rng_.uniform01();
        x[3] = feature_rng_.uniform(1.0, 11.0);
        break;
      case Scenario::covariate_shift: {
        const double mean = test_row ? spec_.shift_mean : 0.0;
        for (double& v : x) v = mean + feature_rng_.normal();
        break;
      }
      default:
        for (double& v : x) v = feature_rng_.normal();
    }
    return x;
  }

  double draw_label(std::span<const double> x) {
    const double sigma = spec_.sigma;
    switch (spec_.scenario) {
      case Scenario::bounded_logistic:
        // y = 10 / (1 + e^{-w.x}) + N(0, sigma^2); mean response in (0, 10].
        return 10.0 / (1.0 + std::exp(-dot(weights_, x))) +
               noise_rng_.normal(0.0, sigma);
      case Scenario::linear_gaussian:
      case Scenario::sparse:
      case Scenario::covariate_shift:
        return dot(weights_, x) + noise_rng_.normal(0.0, sigma);
      case Scenario::nonlinear:
        // Linear trend plus smooth nonlinear terms in the first features.
        return dot(weights_, x) + 2.0 * std::sin(x[0]) + 0.5 * x[1] * x[1] -
               std::cos(2.0 * x[2]) + noise_rng_.normal(0.0, sigma);
      case Scenario::heteroscedastic: {
        // Noise scale grows with the first feature: sigma_i = 0.5 sigma + |x_1|.
        const double si = 0.5 * sigma + std::fabs(x[0]);
        return dot(weights_, x) + noise_rng_.normal(0.0, si);
      }
      case Scenario::heavy_tailed: {
        // Student-t noise with nu = 3 sigma, not rescaled.
        const double nu = spec_.nu_multiplier * sigma;
        return dot(weights_, x) + noise_rng_.student_t(nu);
      }
      case Scenario::outlier: {
        // Contamination: N(0, tau^2) with probability p, tau = 10 sigma.
        const double tau = spec_.tau_multiplier * sigma;
        const bool contaminated = noise_rng_.uniform01() < spec_.outlier_prob;
        return dot(weights_, x) +
               noise_rng_.normal(0.0, contaminated ? tau : sigma);
      }
      case Scenario::friedman1:
        return 10.0 * std::sin(kPi * x[0] * x[1]) +
               20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4] +
               noise_rng_.normal(0.0, sigma);
      case Scenario::friedman2: {
        const double t = x[1] * x[2] - 1.0 / (x[1] * x[3]);
        return std::sqrt(x[0] * x[0] + t * t) + noise_rng_.normal(0.0, sigma);
      }
      case Scenario::friedman3: {
        const double t = x[1] * x[2] - 1.0 / (x[1] * x[3]);
        return std::atan(t / x[0]) + noise_rng_.normal(0.0, sigma);
      }
      default:
        throw std::invalid_argument("unknown scenario");
    }
  }

 private:
  const DatasetSpec& spec_;
  Rng model_rng_;
  Rng feature_rng_;
  Rng noise_rng_;
  std::vector<double> weights_;
};

std::size_t train_count(std::size_t n, double fraction) {
  if (!(fraction > 0.0) || !(fraction < 1.0)) {
    throw std::invalid_argument("train fraction must be in (0, 1)");
  }
  auto n_train = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(n)));
  n_train = std::min(n_train, n);
  return std::max<std::size_t>(n_train, 1);
}

}  // namespace

Dataset generate(const DatasetSpec& spec) {
  if (spec.scenario == Scenario::csv_file) {
    return load_csv(spec.csv_path, spec.label_column, spec.seed,
                    spec.train_fraction);
  }
  if (spec.n < 1) throw std::invalid_argument("n must be positive");
  if (spec.sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (spec.scenario == Scenario::friedman1 && spec.d < 5) {
    throw std::invalid_argument("friedman1 needs at least 5 features");
  }

  Generator gen(spec);
  gen.draw_model();

  Dataset data;
  data.provenance = spec;
  data.split_fraction = spec.train_fraction;
  const std::size_t n_train = train_count(spec.n, spec.train_fraction);

  if (spec.scenario == Scenario::covariate_shift) {
    // Training rows come from the training distribution and test rows from
    // the shifted one; the 80/20 proportions are met by construction.
    for (std::size_t i = 0; i < spec.n; ++i) {
      const bool test_row = i >= n_train;
      const std::vector<double> x = gen.draw_object(test_row);
      const double y = gen.draw_label(x);
      if (test_row) {
        data.test_rows.push_row(x);
        data.test_labels.push_back(y);
      } else {
        data.train_rows.push_row(x);
        data.train_labels.push_back(y);
      }
    }
    return data;
  }

  DataMatrix rows;
  std::vector<double> labels;
  labels.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::vector<double> x = gen.draw_object(false);
    rows.push_row(x);
    labels.push_back(gen.draw_label(x));
  }

  std::vector<std::size_t> perm(spec.n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng split_rng(mix_seed(spec.seed, kSplitStream));
  split_rng.shuffle(perm);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t idx = perm[i];
    if (i < n_train) {
      data.train_rows.push_row(rows.row(idx));
      data.train_labels.push_back(labels[idx]);
    } else {
      data.test_rows.push_row(rows.row(idx));
      data.test_labels.push_back(labels[idx]);
    }
  }
  return data;
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw std::runtime_error("empty file: " + path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  std::stringstream header(line);
  std::string field;
  while (std::getline(header, field, ',')) table.header.push_back(field);

  std::vector<double> row(table.header.size());
  std::size_t line_no = 1;
  bool any_row = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream cells(line);
    std::size_t col = 0;
    while (std::getline(cells, field, ',')) {
      if (col >= row.size()) break;
      char* end = nullptr;
      const double value = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0') {
        throw std::runtime_error("non-numeric cell '" + field + "' at line " +
                                 std::to_string(line_no));
      }
      row[col++] = value;
    }
    if (col != row.size()) {
      throw std::runtime_error("malformed row at line " + std::to_string(line_no));
    }
    table.cells.push_row(row);
    any_row = true;
  }
  if (!any_row) throw std::runtime_error("empty file: " + path);
  return table;
}

Dataset load_csv(const std::string& path, const std::string& label_column,
                 std::uint64_t seed, double train_fraction) {
  const CsvTable table = read_csv_table(path);
  const auto it =
      std::find(table.header.begin(), table.header.end(), label_column);
  if (it == table.header.end()) {
    throw std::runtime_error("missing column '" + label_column + "' in " + path);
  }
  const auto label_idx = static_cast<std::size_t>(it - table.header.begin());

  const std::size_t n = table.cells.rows;
  const std::size_t d = table.cells.cols - 1;
  DataMatrix rows(n, d);
  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < table.cells.cols; ++j) {
      if (j == label_idx) {
        labels[i] = table.cells.at(i, j);
      } else {
        rows.at(i, w++) = table.cells.at(i, j);
      }
    }
  }

  Dataset data;
  data.provenance.scenario = Scenario::csv_file;
  data.provenance.csv_path = path;
  data.provenance.label_column = label_column;
  data.provenance.n = n;
  data.provenance.d = d;
  data.provenance.seed = seed;
  data.provenance.train_fraction = train_fraction;
  data.split_fraction = train_fraction;

  const std::size_t n_train = train_count(n, train_fraction);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng split_rng(mix_seed(seed, kSplitStream));
  split_rng.shuffle(perm);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = perm[i];
    if (i < n_train) {
      data.train_rows.push_row(rows.row(idx));
      data.train_labels.push_back(labels[idx]);
    } else {
      data.test_rows.push_row(rows.row(idx));
      data.test_labels.push_back(labels[idx]);
    }
  }
  return data;
}

void save_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + path);
  out.precision(17);

  const std::size_t d = data.train_rows.cols;
  for (std::size_t j = 0; j < d; ++j) out << 'f' << j << ',';
  out << "label\n";

  const auto write_rows = [&](const DataMatrix& rows,
                              const std::vector<double>& labels) {
    for (std::size_t i = 0; i < rows.rows; ++i) {
      for (std::size_t j = 0; j < d; ++j) out << rows.at(i, j) << ',';
      out << labels[i] << '\n';
    }
  };
  write_rows(data.train_rows, data.train_labels);
  write_rows(data.test_rows, data.test_labels);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace vareg
