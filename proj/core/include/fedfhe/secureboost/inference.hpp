#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedfhe/common/matrix.hpp"
#include "fedfhe/secureboost/model.hpp"
#include "fedfhe/simnet/simnet.hpp"

namespace fedfhe::secureboost {

// One party's share of the inference inputs. Rows are aligned across parties.
struct InferenceShard {
  const LookupTable* table = nullptr;
  const Matrix* X = nullptr;
};

struct InferResult {
  std::vector<double> margins;
  std::vector<std::vector<int>> leaves;          // [sample][tree]
  std::vector<simnet::Account> per_sample;       // traffic of each sample
  std::vector<std::uint64_t> psi_sessions;       // per sample; zero for classic
  simnet::Transcript transcript;                 // all samples, in order
};

// The active party walks each tree; every passive-owned node on the path
// costs one request/response round with its owner.
InferResult classic_infer(const FedTreeModel& model, const InferenceShard& active,
                          const std::vector<InferenceShard>& passives, std::uint64_t seed = 0);

// Node list left after a party deletes, for every node it owns and can still
// reach, the subtree on the side the sample does not take.
std::vector<int> prune_node_list(const FedTree& tree, const LookupTable& table, std::span<const double> row);

// Every party prunes its node lists; the active party intersects them with
// one PSI session per passive party and reads the leaf off the surviving chain.
InferResult psi_infer(const FedTreeModel& model, const InferenceShard& active,
                      const std::vector<InferenceShard>& passives, std::uint64_t seed = 0);

}  // namespace fedfhe::secureboost
