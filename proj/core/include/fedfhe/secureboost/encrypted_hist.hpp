#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/secureboost/xgboost.hpp"

namespace fedfhe::secureboost {

// Gradient packing for encrypted aggregation.
//
// Each ciphertext carries `per_ct` samples. Sample j of a ciphertext owns the
// slot block [j*block, (j+1)*block) filled with its (g, h) pair repeated.
// The passive party multiplies by a 0/1 plaintext that keeps, inside each
// block, only the pair positions of that sample's buckets, sums the products
// over ciphertexts, and folds the blocks together with rotations. Block 0 of
// the result then holds (G_kv, H_kv) at slots 2*(offset_k + v) and +1.
struct GhPacking {
  std::size_t samples = 0;
  std::size_t slots = 0;
  std::size_t block = 0;
  std::size_t per_ct = 0;
  int level = 1;

  std::size_t ciphertexts() const { return (samples + per_ct - 1) / per_ct; }
  // Rotation steps needed for the block fold.
  std::vector<int> fold_steps() const;
};

GhPacking plan_gh_packing(std::size_t samples, std::size_t slots, std::size_t total_buckets, int level = 1);

// Slot vectors for each packed ciphertext.
std::vector<std::vector<double>> pack_gh_blocks(std::span<const GhPair> gh, const GhPacking& packing);

// Features split into groups whose pair slots fit one block; one output
// ciphertext per group.
struct FeatureGroups {
  std::vector<std::vector<std::size_t>> features;  // feature ids per group
  std::vector<std::size_t> offset;                 // per feature: pair offset inside its group
  std::vector<std::size_t> group_of;               // per feature
};

FeatureGroups plan_feature_groups(const std::vector<std::size_t>& buckets, std::size_t block);
std::vector<std::size_t> bucket_sizes(const BucketIndex& index);

// Passive-side aggregator over its plaintext bucket index.
class EncryptedAggregator {
 public:
  EncryptedAggregator(ckks::ContextPtr ctx, std::shared_ptr<const ckks::EvaluationKeys> keys,
                      const BucketIndex& index, GhPacking packing);

  // Histogram ciphertexts (one per feature group) for the given instances.
  std::vector<ckks::Ciphertext> aggregate(const std::vector<ckks::Ciphertext>& gh,
                                          std::span<const std::uint32_t> instances) const;
  std::vector<ckks::Ciphertext> subtract(const std::vector<ckks::Ciphertext>& parent,
                                         const std::vector<ckks::Ciphertext>& left) const;

  const FeatureGroups& groups() const { return groups_; }
  const GhPacking& packing() const { return packing_; }

 private:
  ckks::ContextPtr ctx_;
  ckks::Evaluator eval_;
  ckks::Encoder encoder_;
  const BucketIndex& index_;
  GhPacking packing_;
  FeatureGroups groups_;
};

// Active side: rebuilds the d x l histogram from decrypted group ciphertexts.
// `buckets[k]` is the number of buckets of feature k as announced by the owner.
HistogramPair decode_histogram(const std::vector<std::vector<double>>& group_slots,
                               const std::vector<std::size_t>& buckets, std::size_t block);

}  // namespace fedfhe::secureboost
