#ifndef VAREG_DATA_HPP
#define VAREG_DATA_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace vareg {

// Dense row-major feature matrix.
struct DataMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DataMatrix() = default;
  DataMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols, cols};
  }

  void push_row(std::span<const double> x) {
    if (rows == 0 && cols == 0) cols = x.size();
    if (x.size() != cols) throw std::invalid_argument("row width mismatch");
    values.insert(values.end(), x.begin(), x.end());
    ++rows;
  }

  // Gathers the given rows into a new matrix.
  DataMatrix select(std::span<const std::size_t> idx) const {
    DataMatrix out(idx.size(), cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t j = 0; j < cols; ++j) out.at(i, j) = at(idx[i], j);
    }
    return out;
  }
};

inline std::vector<double> select(std::span<const double> v,
                                  std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace vareg

#endif  // VAREG_DATA_HPP
