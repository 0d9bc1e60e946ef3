#include "vareg/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "vareg/baselines.hpp"
#include "vareg/cvar.hpp"
#include "vareg/rng.hpp"

namespace vareg {

namespace {

// Trial-level sub-streams.
enum : std::uint64_t { kTrialDataStream = 101, kTrialFoldStream = 102 };

std::vector<double> predict_all(const DataMatrix& rows,
                                const std::function<double(std::span<const double>)>& f) {
  std::vector<double> out;
  out.reserve(rows.rows);
  for (std::size_t i = 0; i < rows.rows; ++i) out.push_back(f(rows.row(i)));
  return out;
}

std::string format_cell(double mean, double sem) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << mean << " ± " << sem;
  return os.str();
}

}  // namespace

std::string MethodSpec::name() const {
  if (method == Method::none) return "none";
  return "cvar-m" + std::to_string(winsor_m);
}

double rmse(std::span<const double> predictions, std::span<const double> truths) {
  if (predictions.size() != truths.size() || predictions.empty()) {
    throw std::invalid_argument("prediction/truth length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - truths[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

double run_trial(const DatasetSpec& spec, const std::string& base,
                 const MethodSpec& method, std::uint64_t seed) {
  DatasetSpec trial_spec = spec;
  trial_spec.seed = mix_seed(seed, kTrialDataStream);
  const Dataset data = generate(trial_spec);

  const Standardizer std_fit = fit_standardizer(data.train_rows);
  const DataMatrix train = apply_standardizer(std_fit, data.train_rows);
  const DataMatrix test = apply_standardizer(std_fit, data.test_rows);
  const Trainer trainer = make_trainer(base);

  std::vector<double> predictions;
  if (method.method == Method::none) {
    const RulePtr rule = trainer(train, data.train_labels);
    predictions = predict_all(
        test, [&](std::span<const double> x) { return rule->predict(x); });
  } else {
    CvarConfig cfg;
    cfg.folds = method.folds;
    cfg.winsor_m = method.winsor_m;
    cfg.merge_mode = method.merge;
    cfg.fold_seed = mix_seed(seed, kTrialFoldStream);
    const CvarModel model = fit_cvar(train, data.train_labels, trainer, cfg);
    predictions = predict_all(
        test, [&](std::span<const double> x) { return predict_point(model, x); });
  }
  return rmse(predictions, data.test_labels);
}

BenchReport run_bench(const BenchConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be positive");
  if (cfg.datasets.empty() || cfg.bases.empty() || cfg.methods.empty()) {
    throw std::invalid_argument("empty bench configuration");
  }

  struct Job {
    std::size_t cell;
    int trial;
  };
  BenchReport report;
  std::vector<Job> jobs;
  for (const DatasetSpec& ds : cfg.datasets) {
    for (const std::string& base : cfg.bases) {
      for (const MethodSpec& method : cfg.methods) {
        BenchCell cell;
        cell.dataset = scenario_name(ds.scenario);
        cell.base = base;
        cell.method = method.name();
        cell.trials = cfg.trials;
        cell.raw_rmse.assign(static_cast<std::size_t>(cfg.trials), 0.0);
        for (int t = 0; t < cfg.trials; ++t) {
          jobs.push_back({report.cells.size(), t});
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  // Trials are independent; output slots are preassigned, so any execution
  // order produces the same report.
  const auto run_job = [&](const Job& job) {
    const std::size_t per_method = cfg.methods.size();
    const std::size_t per_base = per_method * cfg.bases.size();
    const DatasetSpec& ds = cfg.datasets[job.cell / per_base];
    const std::string& base = cfg.bases[(job.cell % per_base) / per_method];
    const MethodSpec& method = cfg.methods[job.cell % per_method];
    const std::uint64_t seed = cfg.base_seed + static_cast<std::uint64_t>(job.trial);
    try {
      report.cells[job.cell].raw_rmse[static_cast<std::size_t>(job.trial)] =
          run_trial(ds, base, method, seed);
    } catch (const std::exception& e) {
      throw std::runtime_error("trial with seed " + std::to_string(seed) +
                               " failed: " + e.what());
    }
  };

  const int jobs_n = std::max(1, cfg.jobs);
  if (jobs_n == 1) {
    for (const Job& job : jobs) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs_n));
    for (int w = 0; w < jobs_n; ++w) {
      workers.emplace_back([&, w] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= jobs.size()) return;
          try {
            run_job(jobs[i]);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  for (BenchCell& cell : report.cells) {
    double mean = 0.0;
    for (double v : cell.raw_rmse) mean += v;
    mean /= static_cast<double>(cell.trials);
    cell.mean_rmse = mean;
    if (cell.trials > 1) {
      double ss = 0.0;
      for (double v : cell.raw_rmse) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(cell.trials - 1));
      cell.sem = sd / std::sqrt(static_cast<double>(cell.trials));
    } else {
      cell.sem = 0.0;
    }
  }

  {
    std::ostringstream note;
    note << "ridge lambda=" << kDefaultRidgeLambda
         << ", knn neighbors=" << kDefaultKnnNeighbors;
    report.notes.push_back(note.str());
  }
  for (const MethodSpec& m : cfg.methods) {
    if (m.method == Method::cvar) {
      report.notes.push_back(
          m.name() + ": folds=" + std::to_string(m.folds) + ", merge=" +
          (m.merge == MergeMode::approx ? "approx" : "exact") +
          ", anchors recorded per fold (lower-fit y_*, upper-fit y^*)");
    }
  }
  return report;
}

std::string render_report(const BenchReport& report, ReportFormat format) {
  if (report.cells.empty()) throw std::invalid_argument("empty report");
  std::ostringstream os;

  if (format == ReportFormat::csv) {
    os << "dataset,base,method,mean_rmse,sem,trials\n";
    os << std::fixed << std::setprecision(6);
    for (const BenchCell& c : report.cells) {
      os << c.dataset << ',' << c.base << ',' << c.method << ',' << c.mean_rmse
         << ',' << c.sem << ',' << c.trials << '\n';
    }
    return os.str();
  }

  // Markdown: one table per dataset, bases as rows, methods as columns,
  // row minima in bold, a column-average row at the bottom.
  std::vector<std::string> datasets, bases, methods;
  for (const BenchCell& c : report.cells) {
    if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
      datasets.push_back(c.dataset);
    if (std::find(bases.begin(), bases.end(), c.base) == bases.end())
      bases.push_back(c.base);
    if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
      methods.push_back(c.method);
  }
  std::map<std::string, const BenchCell*> by_key;
  for (const BenchCell& c : report.cells) {
    by_key[c.dataset + '\n' + c.base + '\n' + c.method] = &c;
  }

  for (const std::string& ds : datasets) {
    os << "### " << ds << "\n\n";
    os << "| base |";
    for (const auto& m : methods) os << ' ' << m << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < methods.size(); ++i) os << "---|";
    os << '\n';

    std::vector<double> col_sum(methods.size(), 0.0);
    std::vector<std::size_t> col_n(methods.size(), 0);
    for (const std::string& base : bases) {
      double row_min = std::numeric_limits<double>::infinity();
      for (const auto& m : methods) {
        const auto it = by_key.find(ds + '\n' + base + '\n' + m);
        if (it != by_key.end()) row_min = std::min(row_min, it->second->mean_rmse);
      }
      os << "| " << base << " |";
      for (std::size_t j = 0; j < methods.size(); ++j) {
        const auto it = by_key.find(ds + '\n' + base + '\n' + methods[j]);
        if (it == by_key.end()) {
          os << " |";
          continue;
        }
        const BenchCell& c = *it->second;
        col_sum[j] += c.mean_rmse;
        col_n[j] += 1;
        const bool best = c.mean_rmse == row_min;
        os << ' ' << (best ? "**" : "") << format_cell(c.mean_rmse, c.sem)
           << (best ? "**" : "") << " |";
      }
      os << '\n';
    }
    os << "| average |";
    os << std::fixed << std::setprecision(3);
    for (std::size_t j = 0; j < methods.size(); ++j) {
      if (col_n[j] == 0) {
        os << " |";
      } else {
        os << ' ' << col_sum[j] / static_cast<double>(col_n[j]) << " |";
      }
    }
    os << "\n\n";
    os.unsetf(std::ios_base::floatfield);
  }
  for (const std::string& note : report.notes) os << "_" << note << "_\n";
  return os.str();
}

}  // namespace vareg
