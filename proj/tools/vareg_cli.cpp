// vareg: Venn-Abers regression calibration toolkit.
//
// Subcommands:
//   generate   emit a synthetic dataset as CSV
//   calibrate  fit an IVAR/CVAR on a training CSV and predict a test CSV
//   bench      run the seeded RMSE benchmark grid
//   probe      run the finite validity probe on random bags

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "vareg/baselines.hpp"
#include "vareg/bench.hpp"
#include "vareg/cvar.hpp"
#include "vareg/datagen.hpp"
#include "vareg/rng.hpp"
#include "vareg/vennabers.hpp"

namespace {

using namespace vareg;

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot open file for writing: " + out_path);
  out << text;
}

struct GenerateArgs {
  std::string scenario = "linear-gaussian";
  std::size_t n = 1000;
  std::size_t d = 10;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  double train_fraction = 0.8;
  std::string out;
};

int run_generate(const GenerateArgs& args) {
  DatasetSpec spec;
  spec.scenario = parse_scenario(args.scenario);
  spec.n = args.n;
  spec.d = args.d;
  spec.sigma = args.sigma;
  spec.seed = args.seed;
  spec.train_fraction = args.train_fraction;
  const Dataset data = generate(spec);
  save_csv(args.out, data);
  std::cerr << "wrote " << data.train_rows.rows << " train + "
            << data.test_rows.rows << " test rows to " << args.out << "\n";
  return 0;
}

struct CalibrateArgs {
  std::string train_path;
  std::string test_path;
  std::string label = "label";
  std::string base = "ols";
  std::string method;  // "", "none" or "cvar"
  int m = 1;
  double epsilon = 0.0;
  std::size_t k = 0;  // calibration size; 0 = n/4
  int folds = 10;
  std::string merge = "approx";
  std::string bounds;  // "LO,HI" switches to the bounded regressor
  std::uint64_t seed = 1;
  std::string out;
};

// Test rows may or may not carry the label column; extra labels are ignored.
DataMatrix read_features(const std::string& path, const std::string& label) {
  const CsvTable table = read_csv_table(path);
  std::size_t label_idx = table.header.size();
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] == label) label_idx = j;
  }
  if (label_idx == table.header.size()) return table.cells;
  DataMatrix rows(table.cells.rows, table.cells.cols - 1);
  for (std::size_t i = 0; i < table.cells.rows; ++i) {
    std::size_t w = 0;
    for (std::size_t j = 0; j < table.cells.cols; ++j) {
      if (j != label_idx) rows.at(i, w++) = table.cells.at(i, j);
    }
  }
  return rows;
}

int run_calibrate(const CalibrateArgs& args) {
  const CsvTable train_table = read_csv_table(args.train_path);
  const Dataset train = [&] {
    // Reuse the loader but keep every row on the training side.
    Dataset d;
    const CsvTable& t = train_table;
    std::size_t label_idx = t.header.size();
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      if (t.header[j] == args.label) label_idx = j;
    }
    if (label_idx == t.header.size()) {
      throw std::runtime_error("missing column '" + args.label + "' in " +
                               args.train_path);
    }
    d.train_rows = DataMatrix(t.cells.rows, t.cells.cols - 1);
    d.train_labels.resize(t.cells.rows);
    for (std::size_t i = 0; i < t.cells.rows; ++i) {
      std::size_t w = 0;
      for (std::size_t j = 0; j < t.cells.cols; ++j) {
        if (j == label_idx) {
          d.train_labels[i] = t.cells.at(i, j);
        } else {
          d.train_rows.at(i, w++) = t.cells.at(i, j);
        }
      }
    }
    return d;
  }();
  const DataMatrix test_raw = read_features(args.test_path, args.label);

  const Standardizer std_fit = fit_standardizer(train.train_rows);
  const DataMatrix x = apply_standardizer(std_fit, train.train_rows);
  const DataMatrix test = apply_standardizer(std_fit, test_raw);
  const Trainer trainer = make_trainer(args.base);

  const std::size_t n = x.rows;
  std::size_t k = args.k > 0 ? args.k : std::max<std::size_t>(n / 4, 3);
  if (k >= n) throw std::runtime_error("calibration size too large");

  int m = args.m;
  if (args.epsilon > 0.0) m = epsilon_to_m(args.epsilon, static_cast<int>(k));

  std::ostringstream os;
  os.precision(10);

  if (args.method == "none") {
    const RulePtr rule = trainer(x, train.train_labels);
    os << "prediction\n";
    for (std::size_t i = 0; i < test.rows; ++i) {
      os << rule->predict(test.row(i)) << '\n';
    }
  } else if (args.method == "cvar") {
    CvarConfig cfg;
    cfg.folds = args.folds;
    cfg.winsor_m = m;
    cfg.merge_mode = args.merge == "exact" ? MergeMode::exact : MergeMode::approx;
    cfg.fold_seed = mix_seed(args.seed, 1);
    const CvarModel model = fit_cvar(x, train.train_labels, trainer, cfg);
    os << "prediction\n";
    for (std::size_t i = 0; i < test.rows; ++i) {
      os << predict_point(model, test.row(i)) << '\n';
    }
  } else {
    IvarConfig cfg;
    cfg.calibration_size = k;
    cfg.split_seed = mix_seed(args.seed, 1);
    FittedIvar model;
    if (!args.bounds.empty()) {
      double lo = 0.0, hi = 0.0;
      if (std::sscanf(args.bounds.c_str(), "%lf,%lf", &lo, &hi) != 2) {
        throw std::runtime_error("--bounds expects LO,HI");
      }
      cfg.bounds = {lo, hi};
      model = fit_bounded(x, train.train_labels, trainer, cfg);
    } else {
      cfg.winsor_m = m;
      model = fit_unbounded(x, train.train_labels, trainer, cfg);
    }
    os << "lower,upper\n";
    for (std::size_t i = 0; i < test.rows; ++i) {
      const RegressionInterval ivl = predict_interval(model, test.row(i));
      os << ivl.lower << ',' << ivl.upper << '\n';
    }
  }
  write_output(args.out, os.str());
  return 0;
}

struct BenchArgs {
  std::vector<std::string> scenarios;
  std::vector<std::size_t> ns = {10000};
  std::vector<double> sigmas = {3.0};
  std::size_t d = 10;
  std::vector<std::string> bases = {"ols"};
  std::vector<std::string> methods = {"none", "cvar"};
  std::vector<int> ms = {1};
  int folds = 10;
  std::string merge = "approx";
  int trials = 20;
  std::uint64_t seed = 2024;
  std::string format = "csv";
  std::string out;
  int jobs = 1;
  std::string config_path;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flat key=value config file; values already given on the command line win.
void apply_bench_config(const std::string& path, const CLI::App& cmd,
                        BenchArgs& args) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  const auto given = [&](const std::string& flag) {
    return cmd.get_option(flag)->count() > 0;
  };
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        throw std::runtime_error("config line " + std::to_string(line_no) +
                                 " is not key=value");
      }
      continue;
    }
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "scenario") {
      if (!given("--scenario")) args.scenarios = split_list(value);
    } else if (key == "n") {
      if (!given("--n")) {
        args.ns.clear();
        for (const auto& v : split_list(value)) args.ns.push_back(std::stoull(v));
      }
    } else if (key == "sigma") {
      if (!given("--sigma")) {
        args.sigmas.clear();
        for (const auto& v : split_list(value)) args.sigmas.push_back(std::stod(v));
      }
    } else if (key == "d") {
      if (!given("--d")) args.d = std::stoull(value);
    } else if (key == "base") {
      if (!given("--base")) args.bases = split_list(value);
    } else if (key == "method") {
      if (!given("--method")) args.methods = split_list(value);
    } else if (key == "m") {
      if (!given("--m")) {
        args.ms.clear();
        for (const auto& v : split_list(value)) args.ms.push_back(std::stoi(v));
      }
    } else if (key == "folds") {
      if (!given("--folds")) args.folds = std::stoi(value);
    } else if (key == "merge") {
      if (!given("--merge")) args.merge = value;
    } else if (key == "trials") {
      if (!given("--trials")) args.trials = std::stoi(value);
    } else if (key == "seed") {
      if (!given("--seed")) args.seed = std::stoull(value);
    } else if (key == "format") {
      if (!given("--format")) args.format = value;
    } else if (key == "out") {
      if (!given("--out")) args.out = value;
    } else if (key == "jobs") {
      if (!given("--jobs")) args.jobs = std::stoi(value);
    } else {
      throw std::runtime_error("unknown config key: " + key);
    }
  }
}

int run_bench_cmd(const CLI::App& cmd, BenchArgs& args) {
  if (!args.config_path.empty()) {
    apply_bench_config(args.config_path, cmd, args);
  }
  BenchConfig cfg;
  std::vector<Scenario> scenarios;
  if (args.scenarios.empty()) {
    scenarios = synthetic_scenarios();
  } else {
    for (const auto& s : args.scenarios) scenarios.push_back(parse_scenario(s));
  }
  for (Scenario s : scenarios) {
    for (std::size_t n : args.ns) {
      for (double sigma : args.sigmas) {
        DatasetSpec spec;
        spec.scenario = s;
        spec.n = n;
        spec.d = args.d;
        spec.sigma = sigma;
        cfg.datasets.push_back(spec);
      }
    }
  }
  cfg.bases = args.bases;
  for (const std::string& m : args.methods) {
    if (m == "none") {
      cfg.methods.push_back({Method::none, 0, 0, MergeMode::approx});
    } else if (m == "cvar") {
      for (int winsor_m : args.ms) {
        MethodSpec spec;
        spec.method = Method::cvar;
        spec.winsor_m = winsor_m;
        spec.folds = args.folds;
        spec.merge = args.merge == "exact" ? MergeMode::exact : MergeMode::approx;
        cfg.methods.push_back(spec);
      }
    } else {
      throw std::runtime_error("unknown method: " + m);
    }
  }
  cfg.trials = args.trials;
  cfg.base_seed = args.seed;
  cfg.format = args.format == "md" ? ReportFormat::markdown : ReportFormat::csv;
  cfg.jobs = args.jobs;

  const BenchReport report = run_bench(cfg);
  write_output(args.out, render_report(report, cfg.format));
  return 0;
}

struct ProbeArgs {
  int bags = 200;
  int k = 8;
  int m = 1;
  std::uint64_t seed = 7;
};

int run_probe(const ProbeArgs& args) {
  Rng rng(args.seed);
  int worst_groups = 0;
  double worst_gap = 0.0;
  for (int b = 0; b < args.bags; ++b) {
    const int k = 2 * args.m + 1 +
                  static_cast<int>(rng.uniform_below(
                      static_cast<std::uint64_t>(std::max(1, args.k - 2 * args.m))));
    std::vector<ScoredExample> bag(static_cast<std::size_t>(k) + 1);
    for (auto& e : bag) e = {rng.normal(), rng.normal()};
    const ProbeResult res = validity_probe(bag, args.m);
    worst_groups = std::max(worst_groups, static_cast<int>(res.groups.size()));
    for (const ProbeGroup& g : res.groups) {
      worst_gap = std::max(worst_gap,
                           std::fabs(g.mean_winsorized_label - g.selector));
    }
  }
  std::cout << "probe: " << args.bags << " bags, m=" << args.m
            << ", max |E(Y'|S) - S| = " << worst_gap
            << (worst_gap <= 1e-9 ? "  PASS" : "  FAIL") << "\n";
  return worst_gap <= 1e-9 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Venn-Abers regression calibration toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* cmd_gen = app.add_subcommand("generate", "emit a dataset CSV");
  cmd_gen->add_option("--scenario", gen.scenario, "dataset scenario");
  cmd_gen->add_option("--n", gen.n, "number of examples");
  cmd_gen->add_option("--d", gen.d, "number of features");
  cmd_gen->add_option("--sigma", gen.sigma, "noise level");
  cmd_gen->add_option("--seed", gen.seed, "random seed");
  cmd_gen->add_option("--train-fraction", gen.train_fraction, "train share");
  cmd_gen->add_option("--out", gen.out, "output CSV path")->required();

  CalibrateArgs cal;
  auto* cmd_cal = app.add_subcommand(
      "calibrate", "fit on a train CSV; print intervals or points for a test CSV");
  cmd_cal->add_option("--train", cal.train_path, "training CSV")->required();
  cmd_cal->add_option("--test", cal.test_path, "test CSV")->required();
  cmd_cal->add_option("--label", cal.label, "label column name");
  cmd_cal->add_option("--base", cal.base, "base regressor: ols|ridge|knn");
  cmd_cal->add_option("--method", cal.method,
                      "none = raw base predictions, cvar = merged points; "
                      "default prints IVAR intervals");
  cmd_cal->add_option("--m", cal.m, "winsorization parameter");
  cmd_cal->add_option("--epsilon", cal.epsilon, "alternative to --m");
  cmd_cal->add_option("--k", cal.k, "calibration set size (default n/4)");
  cmd_cal->add_option("--folds", cal.folds, "CVAR folds");
  cmd_cal->add_option("--merge", cal.merge, "exact|approx");
  cmd_cal->add_option("--bounds", cal.bounds, "LO,HI for the bounded regressor");
  cmd_cal->add_option("--seed", cal.seed, "split seed");
  cmd_cal->add_option("--out", cal.out, "output path (default stdout)");

  BenchArgs bench;
  auto* cmd_bench = app.add_subcommand("bench", "run the RMSE benchmark grid");
  cmd_bench->add_option("--scenario", bench.scenarios,
                        "scenarios (default: all ten)");
  cmd_bench->add_option("--n", bench.ns, "dataset sizes");
  cmd_bench->add_option("--sigma", bench.sigmas, "noise levels");
  cmd_bench->add_option("--d", bench.d, "number of features");
  cmd_bench->add_option("--base", bench.bases, "base regressors");
  cmd_bench->add_option("--method", bench.methods, "none and/or cvar");
  cmd_bench->add_option("--m", bench.ms, "winsorization parameters for cvar");
  cmd_bench->add_option("--folds", bench.folds, "CVAR folds");
  cmd_bench->add_option("--merge", bench.merge, "exact|approx");
  cmd_bench->add_option("--trials", bench.trials, "repeated trials per cell");
  cmd_bench->add_option("--seed", bench.seed, "base seed");
  cmd_bench->add_option("--format", bench.format, "csv|md");
  cmd_bench->add_option("--out", bench.out, "output path (default stdout)");
  cmd_bench->add_option("--jobs", bench.jobs, "parallel trial workers");
  cmd_bench->add_option("--config", bench.config_path,
                        "flat key=value file mirroring the flags above; "
                        "command-line flags win");

  ProbeArgs probe;
  auto* cmd_probe = app.add_subcommand("probe", "run the validity probe suite");
  cmd_probe->add_option("--bags", probe.bags, "number of random bags");
  cmd_probe->add_option("--k", probe.k, "maximum calibration size per bag");
  cmd_probe->add_option("--m", probe.m, "winsorization parameter");
  cmd_probe->add_option("--seed", probe.seed, "random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) return run_generate(gen);
    if (cmd_cal->parsed()) return run_calibrate(cal);
    if (cmd_bench->parsed()) return run_bench_cmd(*cmd_bench, bench);
    if (cmd_probe->parsed()) return run_probe(probe);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
