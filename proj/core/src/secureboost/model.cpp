#include "fedfhe/secureboost/model.hpp"

#include <algorithm>

#include "fedfhe/common/error.hpp"
#include "fedfhe/common/json_io.hpp"

namespace fedfhe::secureboost {

namespace {
constexpr int kModelVersion = 1;

void check_version(const nlohmann::json& j, const char* kind) { check_format(j, kind, kModelVersion); }
}  // namespace

const FedTreeNode& FedTree::node(int id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const FedTreeNode& n, int v) { return n.node_id < v; });
  require(it != nodes.end() && it->node_id == id, ErrorCode::invalid_argument,
          "tree has no node " + std::to_string(id));
  return *it;
}

bool FedTree::contains(int id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const FedTreeNode& n, int v) { return n.node_id < v; });
  return it != nodes.end() && it->node_id == id;
}

std::vector<int> FedTree::node_ids() const {
  std::vector<int> ids;
  for (const auto& n : nodes) ids.push_back(n.node_id);
  return ids;
}

std::vector<int> FedTree::subtree(int id) const {
  std::vector<int> out, stack{id};
  while (!stack.empty()) {
    int k = stack.back();
    stack.pop_back();
    if (!contains(k)) continue;
    out.push_back(k);
    if (!node(k).is_leaf) {
      stack.push_back(2 * k + 2);
      stack.push_back(2 * k + 1);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

int FedTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) {
    int k = n.node_id, level = 0;
    while (k > 0) {
      k = (k - 1) / 2;
      ++level;
    }
    d = std::max(d, level);
  }
  return d;
}

int LookupTable::add(LookupEntry e) {
  int id = records.empty() ? 1 : records.rbegin()->first + 1;
  records.emplace(id, e);
  return id;
}

const LookupEntry& LookupTable::at(int record_id) const {
  auto it = records.find(record_id);
  require(it != records.end(), ErrorCode::protocol,
          "unknown record id " + std::to_string(record_id) + " for " + simnet::to_string(party));
  return it->second;
}

bool LookupTable::goes_left(int record_id, std::span<const double> row) const {
  const auto& e = at(record_id);
  require(static_cast<std::size_t>(e.feature) < row.size(), ErrorCode::invalid_argument, "feature out of range");
  return row[e.feature] <= e.threshold;
}

std::vector<int> centralized_path(const FedTree& tree, const std::vector<PartyView>& parties) {
  std::vector<int> path;
  int id = 0;
  for (;;) {
    path.push_back(id);
    const auto& n = tree.node(id);
    if (n.is_leaf) return path;
    const PartyView* owner = nullptr;
    for (const auto& p : parties)
      if (p.table && p.table->party == n.owner) owner = &p;
    require(owner != nullptr, ErrorCode::invalid_argument, "no view for owner " + simnet::to_string(n.owner));
    id = owner->table->goes_left(n.record_id, owner->row) ? n.left() : n.right();
  }
}

double centralized_margin(const FedTreeModel& model, const std::vector<PartyView>& parties) {
  double s = model.base_score;
  for (const auto& t : model.trees) s += t.node(centralized_path(t, parties).back()).leaf_weight;
  return s;
}

nlohmann::json to_json(const FedTreeModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : model.trees) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf)
        nodes.push_back({{"id", n.node_id}, {"leaf", n.leaf_weight}});
      else
        nodes.push_back({{"id", n.node_id}, {"owner", simnet::to_string(n.owner)}, {"record", n.record_id}});
    }
    trees.push_back({{"nodes", nodes}});
  }
  return {{"format", "fedfhe.secureboost.model"},
          {"version", kModelVersion},
          {"base_score", model.base_score},
          {"trees", trees}};
}

FedTreeModel model_from_json(const nlohmann::json& j) {
  check_version(j, "fedfhe.secureboost.model");
  FedTreeModel m;
  try {
    m.base_score = j.at("base_score").get<double>();
    for (const auto& jt : j.at("trees")) {
      FedTree t;
      for (const auto& jn : jt.at("nodes")) {
        FedTreeNode n;
        n.node_id = jn.at("id").get<int>();
        n.is_leaf = jn.contains("leaf");
        if (n.is_leaf) {
          n.leaf_weight = jn.at("leaf").get<double>();
        } else {
          n.owner = simnet::party_from_string(jn.at("owner").get<std::string>());
          n.record_id = jn.at("record").get<int>();
        }
        t.nodes.push_back(n);
      }
      std::sort(t.nodes.begin(), t.nodes.end(), [](auto& a, auto& b) { return a.node_id < b.node_id; });
      m.trees.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::decode_failure, e.what());
  }
  return m;
}

nlohmann::json to_json(const LookupTable& table) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& [id, e] : table.records)
    records.push_back({{"record", id}, {"feature", e.feature}, {"threshold", e.threshold}});
  return {{"format", "fedfhe.secureboost.lookup"},
          {"version", kModelVersion},
          {"party", simnet::to_string(table.party)},
          {"records", records}};
}

LookupTable lookup_from_json(const nlohmann::json& j) {
  check_version(j, "fedfhe.secureboost.lookup");
  LookupTable t;
  try {
    t.party = simnet::party_from_string(j.at("party").get<std::string>());
    for (const auto& r : j.at("records"))
      t.records.emplace(r.at("record").get<int>(),
                        LookupEntry{r.at("feature").get<int>(), r.at("threshold").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::decode_failure, e.what());
  }
  return t;
}

void save_model(const std::string& path, const FedTreeModel& model) { write_json(path, to_json(model)); }
FedTreeModel load_model(const std::string& path) { return model_from_json(read_json(path)); }
void save_lookup(const std::string& path, const LookupTable& table) { write_json(path, to_json(table)); }
LookupTable load_lookup(const std::string& path) { return lookup_from_json(read_json(path)); }

}  // namespace fedfhe::secureboost
