#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/matrix.hpp"
#include "fedfhe/simnet/network.hpp"

namespace fedfhe::preprocess {

struct SmoteConfig {
  std::size_t k = 5;
  // Synthetic rows = round(amount * minority count) unless target_rows is set.
  double amount = 1.0;
  // When nonzero, synthesize until the dataset holds this many rows.
  std::size_t target_rows = 0;
  int minority_label = 1;
  std::uint64_t seed = 1;
  // Masks R_A, R_B are uniform on (-mask_bound, mask_bound).
  double mask_bound = 1024.0;

  void validate() const;
};

// new = orig + lambda (neig - orig)
struct SmotePair {
  std::size_t orig = 0;
  std::size_t neig = 0;
  double lambda = 0.0;
};

struct SmotePlan {
  std::vector<SmotePair> pairs;
  std::size_t size() const { return pairs.size(); }
};

std::size_t smote_count(std::size_t n, std::size_t minority, const SmoteConfig& config);

// k nearest minority rows of every minority row, Euclidean on the given
// features, ties broken by row index. Keyed by position in `minority`.
std::vector<std::vector<std::size_t>> minority_neighbors(const Matrix& F, std::span<const std::size_t> minority,
                                                         std::size_t k);

// Pairs cycle neighbor rank by rank over the minority rows in index order;
// lambda comes from the config seed.
SmotePlan make_smote_plan(const Matrix& knn_features, std::span<const int> y01, const SmoteConfig& config);
Matrix apply_smote_plan(const Matrix& X, const SmotePlan& plan);

// Classic SMOTE; neighbors use the first knn_cols columns (all by default).
Matrix smote_plain(const Matrix& X, std::span<const int> y01, const SmoteConfig& config,
                   std::size_t knn_cols = static_cast<std::size_t>(-1));

// Encrypted SMOTE over vertically split rows. The active party holds labels
// and plans with its own features; the passive party holds the keys.
struct SmoteActiveInput {
  ckks::ContextPtr ctx;
  const Matrix* X = nullptr;
  std::span<const int> y01;
  std::size_t b_features = 0;
  SmoteConfig config;
};

struct SmotePassiveInput {
  ckks::ContextPtr ctx;
  const ckks::KeySet* keys = nullptr;
  const Matrix* X = nullptr;
  std::size_t a_features = 0;
};

struct SmoteActiveOutput {
  SmotePlan plan;
  Matrix rows;  // synthetic A block, unmasked
  Matrix r_a;
  Matrix r_b;   // kept for the training-time correction
};

struct SmotePassiveOutput {
  Matrix rows_masked;  // synthetic B block plus R_B
};

simnet::Task<> smote_fhe_active(simnet::PartyContext& net, const SmoteActiveInput& in, SmoteActiveOutput& out);
simnet::Task<> smote_fhe_passive(simnet::PartyContext& net, const SmotePassiveInput& in, SmotePassiveOutput& out);

struct SmoteFheResult {
  SmoteActiveOutput active;
  SmotePassiveOutput passive;
  simnet::Transcript transcript;
};

SmoteFheResult smote_fhe(const Matrix& XA, std::span<const int> y01, const Matrix& XB, const SmoteConfig& config,
                         const ckks::ContextPtr& ctx, const ckks::KeySet& keys, std::uint64_t seed);

// Rows of -R_B under `original_rows` zero rows, the correction the active
// party adds at the passive columns during training.
Matrix smote_correction(std::size_t original_rows, const Matrix& r_b);

}  // namespace fedfhe::preprocess
