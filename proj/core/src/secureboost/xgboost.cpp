#include "fedfhe/secureboost/xgboost.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "fedfhe/common/error.hpp"

namespace fedfhe::secureboost {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<GhPair> compute_gh(std::span<const int> y, std::span<const double> y_hat) {
  require(y.size() == y_hat.size(), ErrorCode::invalid_argument, "label/score length mismatch");
  std::vector<GhPair> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    require(y[i] == 0 || y[i] == 1, ErrorCode::invalid_argument, "labels must be 0 or 1");
    double p = sigmoid(y_hat[i]);
    out[i] = {p - y[i], p * (1.0 - p)};
  }
  return out;
}

int SplitConfig::buckets() const { return static_cast<int>(std::lround(1.0 / epsilon)); }

void SplitConfig::validate() const {
  require(lambda >= 0 && gamma >= 0, ErrorCode::invalid_argument, "lambda and gamma must be non-negative");
  require(epsilon > 0 && epsilon <= 1, ErrorCode::invalid_argument, "epsilon must lie in (0,1]");
  double inv = 1.0 / epsilon;
  require(std::abs(inv - std::round(inv)) < 1e-9 && inv >= 2, ErrorCode::invalid_argument,
          "1/epsilon must be an integer >= 2");
  require(max_depth >= 0 && num_trees >= 0, ErrorCode::invalid_argument, "negative depth or tree count");
  require(min_samples_leaf >= 1, ErrorCode::invalid_argument, "min_samples_leaf must be positive");
}

std::vector<double> quantile_splits(std::span<const double> values, double epsilon) {
  require(!values.empty(), ErrorCode::empty_input, "quantile_splits on empty column");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto b = static_cast<std::size_t>(std::lround(1.0 / epsilon));
  const std::size_t n = sorted.size();
  std::vector<double> out;
  for (std::size_t v = 1; v < b; ++v) {
    std::size_t cut = v * n / b;
    if (cut == 0 || cut >= n) continue;
    // A cut inside a run of equal values cannot separate them.
    if (sorted[cut - 1] == sorted[cut]) continue;
    double t = sorted[cut - 1] + (sorted[cut] - sorted[cut - 1]) / 2;
    if (out.empty() || t > out.back()) out.push_back(t);
  }
  return out;
}

std::size_t BucketIndex::total_buckets() const {
  std::size_t t = 0;
  for (std::size_t k = 0; k < features(); ++k) t += buckets(k);
  return t;
}

std::size_t bucket_of(std::span<const double> splits, double x) {
  return static_cast<std::size_t>(std::lower_bound(splits.begin(), splits.end(), x) - splits.begin());
}

BucketIndex make_buckets(const Matrix& X, double epsilon) {
  BucketIndex idx;
  idx.splits.resize(X.cols);
  idx.bucket.resize(X.cols);
  std::vector<double> col(X.rows);
  for (std::size_t k = 0; k < X.cols; ++k) {
    for (std::size_t i = 0; i < X.rows; ++i) col[i] = X(i, k);
    idx.splits[k] = quantile_splits(col, epsilon);
    idx.bucket[k].resize(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
      idx.bucket[k][i] = static_cast<std::uint16_t>(bucket_of(idx.splits[k], col[i]));
  }
  return idx;
}

bool HistogramPair::same_shape(const HistogramPair& o) const {
  if (G.size() != o.G.size() || H.size() != o.H.size() || G.size() != H.size()) return false;
  for (std::size_t k = 0; k < G.size(); ++k)
    if (G[k].size() != o.G[k].size() || H[k].size() != o.H[k].size()) return false;
  return true;
}

HistogramPair aggregate_plain(const BucketIndex& index, std::span<const std::uint32_t> instances,
                              std::span<const GhPair> gh) {
  HistogramPair hist;
  hist.G.resize(index.features());
  hist.H.resize(index.features());
  for (std::size_t k = 0; k < index.features(); ++k) {
    hist.G[k].assign(index.buckets(k), 0.0);
    hist.H[k].assign(index.buckets(k), 0.0);
    for (auto i : instances) {
      auto v = index.bucket[k][i];
      hist.G[k][v] += gh[i].g;
      hist.H[k][v] += gh[i].h;
    }
  }
  return hist;
}

HistogramPair sibling_subtract(const HistogramPair& parent, const HistogramPair& left) {
  require(parent.same_shape(left), ErrorCode::invalid_argument, "histogram shape mismatch");
  HistogramPair right = parent;
  for (std::size_t k = 0; k < parent.G.size(); ++k)
    for (std::size_t v = 0; v < parent.G[k].size(); ++v) {
      right.G[k][v] -= left.G[k][v];
      right.H[k][v] -= left.H[k][v];
    }
  return right;
}

std::vector<std::vector<std::uint32_t>> bucket_counts(const BucketIndex& index,
                                                      std::span<const std::uint32_t> instances) {
  std::vector<std::vector<std::uint32_t>> counts(index.features());
  for (std::size_t k = 0; k < index.features(); ++k) {
    counts[k].assign(index.buckets(k), 0);
    for (auto i : instances) ++counts[k][index.bucket[k][i]];
  }
  return counts;
}

std::vector<std::vector<bool>> valid_splits(const std::vector<std::vector<std::uint32_t>>& counts, int min_leaf) {
  std::vector<std::vector<bool>> valid(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) {
    std::uint64_t total = std::accumulate(counts[k].begin(), counts[k].end(), std::uint64_t{0});
    std::uint64_t left = 0;
    valid[k].assign(counts[k].size(), false);
    for (std::size_t v = 0; v + 1 < counts[k].size(); ++v) {
      left += counts[k][v];
      valid[k][v] = left >= static_cast<std::uint64_t>(min_leaf) &&
                    total - left >= static_cast<std::uint64_t>(min_leaf);
    }
  }
  return valid;
}

double split_gain(double gl, double hl, double g, double h, const SplitConfig& config) {
  double gr = g - gl, hr = h - hl;
  const double lambda = config.lambda;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - config.gamma;
}

SplitChoice best_split(const HistogramPair& hist, const SplitConfig& config,
                       const std::vector<std::vector<bool>>* valid) {
  SplitChoice best;
  for (std::size_t k = 0; k < hist.G.size(); ++k) {
    double g = std::accumulate(hist.G[k].begin(), hist.G[k].end(), 0.0);
    double h = std::accumulate(hist.H[k].begin(), hist.H[k].end(), 0.0);
    double gl = 0, hl = 0;
    for (std::size_t v = 0; v + 1 < hist.G[k].size(); ++v) {
      gl += hist.G[k][v];
      hl += hist.H[k][v];
      if (valid && !(*valid)[k][v]) continue;
      double gain = split_gain(gl, hl, g, h, config);
      if (gain > best.gain) best = {static_cast<int>(k), static_cast<int>(v), gain};
    }
  }
  return best;
}

double leaf_weight(std::span<const std::uint32_t> instances, std::span<const GhPair> gh, double lambda) {
  require(!instances.empty(), ErrorCode::empty_input, "leaf with no instances");
  double g = 0, h = 0;
  for (auto i : instances) {
    g += gh[i].g;
    h += gh[i].h;
  }
  return -g / (h + lambda);
}

double PlainModel::margin(std::span<const double> row) const {
  double s = base_score;
  for (std::size_t t = 0; t < trees.size(); ++t) s += trees[t].nodes[leaf_of(t, row)].leaf;
  return s;
}

int PlainModel::leaf_of(std::size_t t, std::span<const double> row) const {
  const auto& tree = trees[t];
  int id = 0;
  while (!tree.nodes[id].is_leaf) {
    const auto& n = tree.nodes[id];
    id = row[n.feature] <= n.threshold ? 2 * id + 1 : 2 * id + 2;
  }
  return id;
}

PlainModel train_plain(const Matrix& X, std::span<const int> y, const SplitConfig& config) {
  config.validate();
  require(X.rows == y.size(), ErrorCode::invalid_argument, "row/label mismatch");
  auto index = make_buckets(X, config.epsilon);
  PlainModel model;
  std::vector<double> margin(X.rows, model.base_score);
  const std::size_t max_nodes = (std::size_t{2} << config.max_depth) - 1;

  for (int t = 0; t < config.num_trees; ++t) {
    auto gh = compute_gh(y, margin);
    PlainTree tree;
    tree.nodes.resize(max_nodes);
    tree.present.assign(max_nodes, false);
    std::vector<std::uint32_t> all(X.rows);
    std::iota(all.begin(), all.end(), 0u);
    std::deque<std::pair<int, std::vector<std::uint32_t>>> queue;
    queue.emplace_back(0, std::move(all));
    while (!queue.empty()) {
      auto [id, inst] = std::move(queue.front());
      queue.pop_front();
      tree.present[id] = true;
      int depth = 0;
      for (int k = id; k > 0; k = (k - 1) / 2) ++depth;
      auto& node = tree.nodes[id];
      SplitChoice choice;
      if (depth < config.max_depth && inst.size() >= 2u * static_cast<unsigned>(config.min_samples_leaf)) {
        auto hist = aggregate_plain(index, inst, gh);
        auto valid = valid_splits(bucket_counts(index, inst), config.min_samples_leaf);
        choice = best_split(hist, config, &valid);
      }
      if (!choice.found() || choice.gain <= 0) {
        node.is_leaf = true;
        node.leaf = config.learning_rate * leaf_weight(inst, gh, config.lambda);
        continue;
      }
      node.is_leaf = false;
      node.feature = choice.feature;
      node.threshold = index.splits[choice.feature][choice.bucket];
      std::vector<std::uint32_t> left, right;
      for (auto i : inst) (index.bucket[choice.feature][i] <= choice.bucket ? left : right).push_back(i);
      queue.emplace_back(2 * id + 1, std::move(left));
      queue.emplace_back(2 * id + 2, std::move(right));
    }
    model.trees.push_back(std::move(tree));
    for (std::size_t i = 0; i < X.rows; ++i) margin[i] += model.trees.back().nodes[model.leaf_of(t, X.row(i))].leaf;
  }
  return model;
}

}  // namespace fedfhe::secureboost
