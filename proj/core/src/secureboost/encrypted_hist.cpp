#include "fedfhe/secureboost/encrypted_hist.hpp"

#include <optional>

#include "fedfhe/common/error.hpp"
#include "fedfhe/packed/layout.hpp"

namespace fedfhe::secureboost {

std::vector<int> GhPacking::fold_steps() const {
  std::vector<int> steps;
  for (std::size_t s = block; s < block * per_ct; s *= 2) steps.push_back(static_cast<int>(s));
  return steps;
}

GhPacking plan_gh_packing(std::size_t samples, std::size_t slots, std::size_t total_buckets, int level) {
  require(samples > 0, ErrorCode::empty_input, "no samples to pack");
  require(total_buckets > 0, ErrorCode::invalid_argument, "no buckets");
  GhPacking p;
  p.samples = samples;
  p.slots = slots;
  p.level = level;
  p.block = std::min(slots, packed::next_pow2(2 * total_buckets));
  p.per_ct = slots / p.block;
  return p;
}

std::vector<std::vector<double>> pack_gh_blocks(std::span<const GhPair> gh, const GhPacking& packing) {
  require(gh.size() == packing.samples, ErrorCode::invalid_argument, "gh length does not match packing");
  std::vector<std::vector<double>> out(packing.ciphertexts(), std::vector<double>(packing.slots, 0.0));
  for (std::size_t i = 0; i < gh.size(); ++i) {
    auto& slots = out[i / packing.per_ct];
    const std::size_t base = (i % packing.per_ct) * packing.block;
    for (std::size_t s = 0; s < packing.block; s += 2) {
      slots[base + s] = gh[i].g;
      slots[base + s + 1] = gh[i].h;
    }
  }
  return out;
}

std::vector<std::size_t> bucket_sizes(const BucketIndex& index) {
  std::vector<std::size_t> b(index.features());
  for (std::size_t k = 0; k < b.size(); ++k) b[k] = index.buckets(k);
  return b;
}

FeatureGroups plan_feature_groups(const std::vector<std::size_t>& buckets, std::size_t block) {
  FeatureGroups g;
  g.offset.resize(buckets.size());
  g.group_of.resize(buckets.size());
  std::size_t used = 0;
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    require(2 * buckets[k] <= block, ErrorCode::slot_budget, "feature buckets exceed one block");
    if (g.features.empty() || 2 * (used + buckets[k]) > block) {
      g.features.emplace_back();
      used = 0;
    }
    g.features.back().push_back(k);
    g.offset[k] = used;
    g.group_of[k] = g.features.size() - 1;
    used += buckets[k];
  }
  return g;
}

EncryptedAggregator::EncryptedAggregator(ckks::ContextPtr ctx, std::shared_ptr<const ckks::EvaluationKeys> keys,
                                         const BucketIndex& index, GhPacking packing)
    : ctx_(ctx),
      eval_(ctx, std::move(keys)),
      encoder_(ctx),
      index_(index),
      packing_(packing),
      groups_(plan_feature_groups(bucket_sizes(index), packing.block)) {
  require(packing_.slots == ctx_->slots(), ErrorCode::invalid_argument, "packing slot count mismatch");
}

std::vector<ckks::Ciphertext> EncryptedAggregator::aggregate(const std::vector<ckks::Ciphertext>& gh,
                                                             std::span<const std::uint32_t> instances) const {
  require(gh.size() == packing_.ciphertexts(), ErrorCode::invalid_argument, "gh ciphertext count mismatch");
  const int p = ctx_->params().scale_bits;
  std::vector<std::vector<std::uint32_t>> by_ct(gh.size());
  for (auto i : instances) {
    require(i < packing_.samples, ErrorCode::invalid_argument, "instance id out of range");
    by_ct[i / packing_.per_ct].push_back(i);
  }

  std::vector<ckks::Ciphertext> out;
  out.reserve(groups_.features.size());
  for (const auto& feats : groups_.features) {
    std::optional<ckks::Ciphertext> acc;
    for (std::size_t c = 0; c < gh.size(); ++c) {
      // An empty node still needs one term so the result is a valid encryption of zero.
      if (by_ct[c].empty() && (acc || c + 1 < gh.size())) continue;
      std::vector<double> mask(packing_.slots, 0.0);
      for (auto i : by_ct[c]) {
        const std::size_t base = (i % packing_.per_ct) * packing_.block;
        for (auto k : feats) {
          const std::size_t pos = base + 2 * (groups_.offset[k] + index_.bucket[k][i]);
          mask[pos] = 1.0;
          mask[pos + 1] = 1.0;
        }
      }
      auto term = eval_.cmult(gh[c], encoder_.encode(mask, p, gh[c].level));
      if (acc)
        eval_.add_inplace(*acc, term);
      else
        acc = std::move(term);
    }
    auto ct = eval_.rescale(*acc, p);
    for (int step : packing_.fold_steps()) ct = eval_.add(ct, eval_.rotate(ct, step));
    out.push_back(std::move(ct));
  }
  return out;
}

std::vector<ckks::Ciphertext> EncryptedAggregator::subtract(const std::vector<ckks::Ciphertext>& parent,
                                                            const std::vector<ckks::Ciphertext>& left) const {
  require(parent.size() == left.size(), ErrorCode::invalid_argument, "histogram group count mismatch");
  std::vector<ckks::Ciphertext> out;
  out.reserve(parent.size());
  for (std::size_t g = 0; g < parent.size(); ++g) out.push_back(eval_.sub(parent[g], left[g]));
  return out;
}

HistogramPair decode_histogram(const std::vector<std::vector<double>>& group_slots,
                               const std::vector<std::size_t>& buckets, std::size_t block) {
  auto groups = plan_feature_groups(buckets, block);
  require(group_slots.size() == groups.features.size(), ErrorCode::decode_failure, "histogram group count");
  HistogramPair hist;
  hist.G.resize(buckets.size());
  hist.H.resize(buckets.size());
  for (std::size_t k = 0; k < buckets.size(); ++k) {
    const auto& slots = group_slots[groups.group_of[k]];
    hist.G[k].resize(buckets[k]);
    hist.H[k].resize(buckets[k]);
    for (std::size_t v = 0; v < buckets[k]; ++v) {
      const std::size_t pos = 2 * (groups.offset[k] + v);
      require(pos + 1 < slots.size(), ErrorCode::decode_failure, "histogram slot out of range");
      hist.G[k][v] = slots[pos];
      hist.H[k][v] = slots[pos + 1];
    }
  }
  return hist;
}

}  // namespace fedfhe::secureboost
