#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/matrix.hpp"
#include "fedfhe/secureboost/model.hpp"
#include "fedfhe/secureboost/xgboost.hpp"
#include "fedfhe/simnet/simnet.hpp"

namespace fedfhe::secureboost {

// Key material owned by the active party. Passive parties only ever see the
// rotation keys they need.
struct ActiveKeys {
  ckks::ContextPtr ctx;
  ckks::KeySet keys;

  static ActiveKeys generate(const ckks::FheParams& params, std::uint64_t seed);
};

struct ActiveInput {
  const Matrix* X = nullptr;
  std::span<const int> y;  // {0,1}
  const ActiveKeys* keys = nullptr;
  SplitConfig config;
  std::size_t num_passive = 0;
};

struct ActiveOutput {
  FedTreeModel model;
  LookupTable table;
  std::vector<double> train_margin;
};

struct PassiveInput {
  const Matrix* X = nullptr;
  ckks::ContextPtr ctx;  // public parameters only
  SplitConfig config;
};

simnet::Task<> secureboost_active(simnet::PartyContext& ctx, const ActiveInput& in, ActiveOutput& out);
simnet::Task<> secureboost_passive(simnet::PartyContext& ctx, const PassiveInput& in, LookupTable& out);

struct TrainResult {
  FedTreeModel model;
  LookupTable active_table;
  std::vector<LookupTable> passive_tables;
  std::vector<double> train_margin;
  simnet::Transcript transcript;
};

// Vertically partitioned training: rows are aligned across parties, the
// active party holds y and `active_X`, passive party i holds `passive_X[i]`.
TrainResult train_ensemble(const Matrix& active_X, std::span<const int> y, const std::vector<Matrix>& passive_X,
                           const SplitConfig& config, const ActiveKeys& keys, std::uint64_t seed = 0);

}  // namespace fedfhe::secureboost
