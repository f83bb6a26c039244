#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "fedfhe/common/matrix.hpp"

namespace fedfhe::secureboost {

struct GhPair {
  double g = 0.0;
  double h = 0.0;
};

// Binary logistic loss; y in {0,1}, y_hat raw margin.
std::vector<GhPair> compute_gh(std::span<const int> y, std::span<const double> y_hat);

double sigmoid(double x);

struct SplitConfig {
  double lambda = 1.0;
  double gamma = 0.0;
  double epsilon = 0.125;
  int max_depth = 3;
  int num_trees = 5;
  double learning_rate = 0.3;
  int min_samples_leaf = 2;

  int buckets() const;
  void validate() const;
};

// At most 1/epsilon - 1 interior thresholds at midpoints between distinct
// sorted values, cutting the sorted column into equal-count buckets.
// Constant columns give no thresholds.
std::vector<double> quantile_splits(std::span<const double> values, double epsilon);

// Bucket v of feature k holds x with s[v-1] < x <= s[v].
struct BucketIndex {
  std::vector<std::vector<double>> splits;          // [feature][threshold]
  std::vector<std::vector<std::uint16_t>> bucket;   // [feature][sample]

  std::size_t features() const { return splits.size(); }
  std::size_t buckets(std::size_t k) const { return splits[k].size() + 1; }
  std::size_t total_buckets() const;
};

std::size_t bucket_of(std::span<const double> splits, double x);
BucketIndex make_buckets(const Matrix& X, double epsilon);

struct HistogramPair {
  std::vector<std::vector<double>> G;  // [feature][bucket]
  std::vector<std::vector<double>> H;

  bool same_shape(const HistogramPair& o) const;
};

HistogramPair aggregate_plain(const BucketIndex& index, std::span<const std::uint32_t> instances,
                              std::span<const GhPair> gh);
HistogramPair sibling_subtract(const HistogramPair& parent, const HistogramPair& left);

// Bucket counts over the node's instances; used to enforce the minimum leaf size.
std::vector<std::vector<std::uint32_t>> bucket_counts(const BucketIndex& index,
                                                      std::span<const std::uint32_t> instances);
// valid[k][v]: splitting feature k after bucket v leaves >= min_leaf samples on both sides.
std::vector<std::vector<bool>> valid_splits(const std::vector<std::vector<std::uint32_t>>& counts, int min_leaf);

struct SplitChoice {
  int feature = -1;
  int bucket = -1;
  double gain = -std::numeric_limits<double>::infinity();

  bool found() const { return feature >= 0; }
};

double split_gain(double gl, double hl, double g, double h, const SplitConfig& config);
// Best prefix split; ties keep the earliest (feature, bucket).
SplitChoice best_split(const HistogramPair& hist, const SplitConfig& config,
                       const std::vector<std::vector<bool>>* valid = nullptr);

// w* = -sum(g) / (sum(h) + lambda)
double leaf_weight(std::span<const std::uint32_t> instances, std::span<const GhPair> gh, double lambda);

// Centralized reference trainer with identical split rules.
struct PlainNode {
  int feature = -1;
  double threshold = 0.0;
  double leaf = 0.0;
  bool is_leaf = true;
};

struct PlainTree {
  std::vector<PlainNode> nodes;  // heap order; children of i are 2i+1, 2i+2
  bool has(int id) const { return id >= 0 && static_cast<std::size_t>(id) < nodes.size() && present[id]; }
  std::vector<bool> present;
};

struct PlainModel {
  std::vector<PlainTree> trees;
  double base_score = 0.0;

  double margin(std::span<const double> row) const;
  int leaf_of(std::size_t tree, std::span<const double> row) const;
};

PlainModel train_plain(const Matrix& X, std::span<const int> y, const SplitConfig& config);

}  // namespace fedfhe::secureboost
