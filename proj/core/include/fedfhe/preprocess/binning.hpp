#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedfhe/common/matrix.hpp"

namespace fedfhe::preprocess {

// B equal-width bins on [min, max]. Bin 0 is [e0, e1]; bin k > 0 is (e_k, e_k+1].
// Values outside the fitted range fall into the end bins.
struct BinSpec {
  std::size_t feature = 0;
  std::vector<double> edges;

  std::size_t bins() const { return edges.empty() ? 0 : edges.size() - 1; }
  std::size_t bin_of(double v) const;
};

// n x B one-hot matrix plus the bin index of each row.
struct BinMatrix {
  Matrix onehot;
  std::vector<std::size_t> index;

  std::vector<std::size_t> populations() const;
};

BinSpec equal_width_bins(std::span<const double> values, std::size_t bins, std::size_t feature = 0);
BinMatrix one_hot(std::span<const double> values, const BinSpec& spec);

// One spec per column of X.
std::vector<BinSpec> equal_width_bins(const Matrix& X, std::size_t bins);
std::vector<double> column(const Matrix& X, std::size_t j);

nlohmann::json to_json(const BinSpec& spec);
BinSpec bin_spec_from_json(const nlohmann::json& j);

}  // namespace fedfhe::preprocess
