#include "fedfhe/preprocess/binning.hpp"

#include <algorithm>
#include <cmath>

#include "fedfhe/common/error.hpp"

namespace fedfhe::preprocess {

std::size_t BinSpec::bin_of(double v) const {
  require(edges.size() >= 2, ErrorCode::invalid_argument, "bin spec has no bins");
  auto first = edges.begin() + 1, last = edges.end() - 1;
  return static_cast<std::size_t>(std::lower_bound(first, last, v) - first);
}

std::vector<std::size_t> BinMatrix::populations() const {
  std::vector<std::size_t> pop(onehot.cols, 0);
  for (auto b : index) ++pop[b];
  return pop;
}

BinSpec equal_width_bins(std::span<const double> values, std::size_t bins, std::size_t feature) {
  require(bins >= 2, ErrorCode::invalid_argument, "need at least two bins");
  require(!values.empty(), ErrorCode::empty_input, "no values to bin");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  require(std::isfinite(*lo) && std::isfinite(*hi), ErrorCode::invalid_argument, "non-finite value");
  require(*lo < *hi, ErrorCode::invalid_argument, "constant feature " + std::to_string(feature) + " cannot be binned");
  BinSpec spec{feature, std::vector<double>(bins + 1)};
  const double width = (*hi - *lo) / static_cast<double>(bins);
  for (std::size_t k = 0; k < bins; ++k) spec.edges[k] = *lo + width * static_cast<double>(k);
  spec.edges[bins] = *hi;
  return spec;
}

BinMatrix one_hot(std::span<const double> values, const BinSpec& spec) {
  BinMatrix m{Matrix(values.size(), spec.bins()), std::vector<std::size_t>(values.size())};
  for (std::size_t i = 0; i < values.size(); ++i) {
    m.index[i] = spec.bin_of(values[i]);
    m.onehot(i, m.index[i]) = 1.0;
  }
  return m;
}

std::vector<double> column(const Matrix& X, std::size_t j) {
  std::vector<double> out(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) out[i] = X(i, j);
  return out;
}

std::vector<BinSpec> equal_width_bins(const Matrix& X, std::size_t bins) {
  std::vector<BinSpec> specs;
  for (std::size_t j = 0; j < X.cols; ++j) specs.push_back(equal_width_bins(column(X, j), bins, j));
  return specs;
}

nlohmann::json to_json(const BinSpec& spec) { return {{"feature", spec.feature}, {"edges", spec.edges}}; }

BinSpec bin_spec_from_json(const nlohmann::json& j) {
  BinSpec s{j.at("feature").get<std::size_t>(), j.at("edges").get<std::vector<double>>()};
  require(s.edges.size() >= 2 && std::is_sorted(s.edges.begin(), s.edges.end()) &&
              std::adjacent_find(s.edges.begin(), s.edges.end()) == s.edges.end(),
          ErrorCode::decode_failure, "bin edges must be strictly increasing");
  return s;
}

}  // namespace fedfhe::preprocess
