#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedfhe/common/matrix.hpp"
#include "fedfhe/simnet/party.hpp"

namespace fedfhe::secureboost {

using simnet::PartyId;

// Shared topology only; thresholds stay in the owner's lookup table.
struct FedTreeNode {
  int node_id = 0;
  bool is_leaf = true;
  PartyId owner{};
  int record_id = 0;
  double leaf_weight = 0.0;

  int left() const { return 2 * node_id + 1; }
  int right() const { return 2 * node_id + 2; }
};

struct FedTree {
  std::vector<FedTreeNode> nodes;  // ascending node_id

  const FedTreeNode& node(int id) const;
  bool contains(int id) const;
  std::vector<int> node_ids() const;
  std::vector<int> subtree(int id) const;
  int depth() const;
};

struct FedTreeModel {
  std::vector<FedTree> trees;
  double base_score = 0.0;
};

struct LookupEntry {
  int feature = 0;  // column in the owner's local feature block
  double threshold = 0.0;
};

struct LookupTable {
  PartyId party{};
  std::map<int, LookupEntry> records;  // record ids start at 1

  int add(LookupEntry e);
  const LookupEntry& at(int record_id) const;
  // True when the owner routes `row` to the left child.
  bool goes_left(int record_id, std::span<const double> row) const;
};

// Path from the root to a leaf given every party's table and row.
struct PartyView {
  const LookupTable* table = nullptr;
  std::span<const double> row;
};
std::vector<int> centralized_path(const FedTree& tree, const std::vector<PartyView>& parties);
double centralized_margin(const FedTreeModel& model, const std::vector<PartyView>& parties);

nlohmann::json to_json(const FedTreeModel& model);
FedTreeModel model_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LookupTable& table);
LookupTable lookup_from_json(const nlohmann::json& j);

void save_model(const std::string& path, const FedTreeModel& model);
FedTreeModel load_model(const std::string& path);
void save_lookup(const std::string& path, const LookupTable& table);
LookupTable load_lookup(const std::string& path);

}  // namespace fedfhe::secureboost
