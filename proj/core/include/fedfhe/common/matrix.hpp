#pragma once

#include <cstddef>
#include <vector>

namespace fedfhe {

// Dense row-major real matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  Matrix transpose() const {
    Matrix t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  std::vector<double> row(std::size_t r) const {
    return std::vector<double>(data.begin() + r * cols, data.begin() + (r + 1) * cols);
  }

  bool operator==(const Matrix&) const = default;
};

}  // namespace fedfhe
