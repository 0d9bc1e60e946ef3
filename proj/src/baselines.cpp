#include "vareg/baselines.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vareg {

namespace {

void check_shapes(const DataMatrix& rows, std::span<const double> labels) {
  if (rows.rows == 0) throw std::invalid_argument("empty training set");
  if (rows.rows != labels.size()) {
    throw std::invalid_argument("rows and labels disagree in length");
  }
}

Eigen::MatrixXd to_eigen(const DataMatrix& rows) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                        Eigen::RowMajor>>(
      rows.values.data(), static_cast<Eigen::Index>(rows.rows),
      static_cast<Eigen::Index>(rows.cols));
}

class LinearRule final : public PredictionRule {
 public:
  LinearRule(double intercept, std::vector<double> coef)
      : intercept_(intercept), coef_(std::move(coef)) {}

  double predict(std::span<const double> x) const override {
    if (x.size() != coef_.size()) {
      throw std::invalid_argument("feature dimension mismatch");
    }
    double y = intercept_;
    for (std::size_t j = 0; j < coef_.size(); ++j) y += coef_[j] * x[j];
    return y;
  }

 private:
  double intercept_;
  std::vector<double> coef_;
};

class KnnRule final : public PredictionRule {
 public:
  KnnRule(DataMatrix rows, std::vector<double> labels, int neighbors)
      : rows_(std::move(rows)), labels_(std::move(labels)), k_(neighbors) {}

  double predict(std::span<const double> x) const override {
    if (x.size() != rows_.cols) {
      throw std::invalid_argument("feature dimension mismatch");
    }
    std::vector<std::pair<double, std::size_t>> dist(rows_.rows);
    for (std::size_t i = 0; i < rows_.rows; ++i) {
      double d2 = 0.0;
      const auto row = rows_.row(i);
      for (std::size_t j = 0; j < rows_.cols; ++j) {
        const double diff = row[j] - x[j];
        d2 += diff * diff;
      }
      dist[i] = {d2, i};
    }
    const auto k = static_cast<std::size_t>(k_);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    double mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) mean += labels_[dist[i].second];
    return mean / static_cast<double>(k);
  }

 private:
  DataMatrix rows_;
  std::vector<double> labels_;
  int k_;
};

}  // namespace

RulePtr train_ols(const DataMatrix& rows, std::span<const double> labels) {
  check_shapes(rows, labels);
  const auto n = static_cast<Eigen::Index>(rows.rows);
  const auto d = static_cast<Eigen::Index>(rows.cols);
  Eigen::MatrixXd design(n, d + 1);
  design.col(0).setOnes();
  design.rightCols(d) = to_eigen(rows);
  const Eigen::VectorXd y =
      Eigen::Map<const Eigen::VectorXd>(labels.data(), n);
  const Eigen::VectorXd beta =
      design.completeOrthogonalDecomposition().solve(y);
  std::vector<double> coef(beta.data() + 1, beta.data() + d + 1);
  return std::make_shared<LinearRule>(beta[0], std::move(coef));
}

RulePtr train_ridge(const DataMatrix& rows, std::span<const double> labels,
                    double lambda) {
  check_shapes(rows, labels);
  if (lambda < 0.0) throw std::invalid_argument("lambda must be non-negative");
  if (lambda == 0.0) return train_ols(rows, labels);
  const auto n = static_cast<Eigen::Index>(rows.rows);
  const auto d = static_cast<Eigen::Index>(rows.cols);
  Eigen::MatrixXd x = to_eigen(rows);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(labels.data(), n);
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  x.rowwise() -= x_mean;
  y.array() -= y_mean;
  Eigen::MatrixXd gram = x.transpose() * x;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXd beta = gram.ldlt().solve(x.transpose() * y);
  std::vector<double> coef(beta.data(), beta.data() + d);
  return std::make_shared<LinearRule>(y_mean - x_mean.dot(beta),
                                      std::move(coef));
}

RulePtr train_knn(const DataMatrix& rows, std::span<const double> labels,
                  int neighbors) {
  check_shapes(rows, labels);
  if (neighbors < 1 || static_cast<std::size_t>(neighbors) > rows.rows) {
    throw std::invalid_argument("neighbors must be in [1, rows]");
  }
  return std::make_shared<KnnRule>(
      rows, std::vector<double>(labels.begin(), labels.end()), neighbors);
}

Trainer make_trainer(const std::string& name) {
  if (name == "ols") {
    return [](const DataMatrix& x, std::span<const double> y) {
      return train_ols(x, y);
    };
  }
  if (name == "ridge") {
    return [](const DataMatrix& x, std::span<const double> y) {
      return train_ridge(x, y, kDefaultRidgeLambda);
    };
  }
  if (name == "knn") {
    return [](const DataMatrix& x, std::span<const double> y) {
      return train_knn(x, y, kDefaultKnnNeighbors);
    };
  }
  throw std::invalid_argument("unknown base regressor: " + name);
}

Standardizer fit_standardizer(const DataMatrix& rows) {
  if (rows.rows == 0) throw std::invalid_argument("empty training set");
  Standardizer s;
  s.means.assign(rows.cols, 0.0);
  s.stddevs.assign(rows.cols, 1.0);
  const double n = static_cast<double>(rows.rows);
  for (std::size_t j = 0; j < rows.cols; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < rows.rows; ++i) mean += rows.at(i, j);
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < rows.rows; ++i) {
      const double diff = rows.at(i, j) - mean;
      var += diff * diff;
    }
    var /= n;
    s.means[j] = mean;
    s.stddevs[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

DataMatrix apply_standardizer(const Standardizer& s, const DataMatrix& rows) {
  if (rows.cols != s.means.size()) {
    throw std::invalid_argument("feature dimension mismatch");
  }
  DataMatrix out(rows.rows, rows.cols);
  for (std::size_t i = 0; i < rows.rows; ++i) {
    for (std::size_t j = 0; j < rows.cols; ++j) {
      out.at(i, j) = (rows.at(i, j) - s.means[j]) / s.stddevs[j];
    }
  }
  return out;
}

}  // namespace vareg
