#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "fedfhe/common/matrix.hpp"

namespace fedfhe::data {

struct Dataset {
  std::vector<std::string> ids;
  std::vector<std::string> features;
  Matrix X;
  std::string label;   // empty for a party without labels
  std::vector<int> y;  // {0, 1}

  std::size_t rows() const { return X.rows; }
  bool labelled() const { return !label.empty(); }
};

struct CsvSchema {
  std::string label;      // empty: no label column expected
  std::string id_column;  // empty: ids are "row<i>"
  std::string positive = "1";
  // Columns kept as features; empty keeps every other column.
  std::vector<std::string> features;
};

// Header row required; every feature cell must parse as a finite number.
Dataset load_csv(const std::string& path, const CsvSchema& schema);
Dataset parse_csv(std::istream& in, const CsvSchema& schema, const std::string& source = "<stream>");

// Only the id column; other columns may hold anything.
std::vector<std::string> read_ids(const std::string& path, const std::string& id_column);

// Writes id, features, label (when present) and, if non-empty, a provenance
// column with one entry per row.
void write_csv(const std::string& path, const Dataset& d, std::span<const std::string> provenance = {});

Dataset select_rows(const Dataset& d, std::span<const std::size_t> rows);
Dataset select_features(const Dataset& d, std::span<const std::string> names);
// Rows of `d` reordered to follow `ids`; throws if one is missing.
Dataset align_to(const Dataset& d, std::span<const std::string> ids);

std::vector<int> to_pm(std::span<const int> y01);

// Train-set statistics; constant columns get unit scale.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Scaler fit(const Matrix& X);
  // (x - mean) / std clipped to [-clip, clip].
  Matrix apply(const Matrix& X, double clip = 8.0) const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class seeded shuffle; round(test_fraction * class size) rows of each
// class go to the test side. Both lists come back sorted.
SplitIndices stratified_split(std::span<const int> y01, double test_fraction, std::uint64_t seed);

}  // namespace fedfhe::data
