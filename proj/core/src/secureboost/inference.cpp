#include "fedfhe/secureboost/inference.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "fedfhe/common/error.hpp"
#include "fedfhe/psi/psi.hpp"

namespace fedfhe::secureboost {

using simnet::PartyContext;
using simnet::PartyId;
using simnet::Task;
namespace tags = simnet::tags;

namespace {

void check_shards(const InferenceShard& active, const std::vector<InferenceShard>& passives) {
  require(active.table && active.X, ErrorCode::invalid_argument, "active shard incomplete");
  for (const auto& p : passives) {
    require(p.table && p.X, ErrorCode::invalid_argument, "passive shard incomplete");
    require(p.X->rows == active.X->rows, ErrorCode::invalid_argument, "shards are not row-aligned");
  }
}

std::size_t passive_slot(const FedTreeNode& n, std::size_t passives) {
  require(n.owner.role == simnet::Role::passive && n.owner.index >= 1 &&
              static_cast<std::size_t>(n.owner.index) <= passives,
          ErrorCode::protocol, "node owned by unknown party " + simnet::to_string(n.owner));
  return static_cast<std::size_t>(n.owner.index - 1);
}

std::string element(std::size_t tree, int node) { return std::to_string(tree) + ":" + std::to_string(node); }

}  // namespace

InferResult classic_infer(const FedTreeModel& model, const InferenceShard& active,
                          const std::vector<InferenceShard>& passives, std::uint64_t seed) {
  check_shards(active, passives);
  InferResult result;
  const std::size_t rows = active.X->rows;
  result.margins.resize(rows);
  result.leaves.resize(rows);
  result.psi_sessions.assign(rows, 0);

  for (std::size_t s = 0; s < rows; ++s) {
    simnet::Network net(seed + s);
    const auto row = active.X->row(s);
    net.add_party(PartyId::active(), [&](PartyContext& ctx) -> Task<> {
      double margin = model.base_score;
      for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        int id = 0;
        while (!tree.node(id).is_leaf) {
          const auto& n = tree.node(id);
          bool left;
          if (n.owner == ctx.id()) {
            left = active.table->goes_left(n.record_id, row);
          } else {
            passive_slot(n, passives.size());
            ByteWriter w;
            w.u32(static_cast<std::uint32_t>(s));
            w.u32(static_cast<std::uint32_t>(n.record_id));
            ctx.send(n.owner, tags::INF_REQ, w.take());
            auto reply = co_await ctx.recv(n.owner, tags::INF_RESP);
            require(reply.size() == 1, ErrorCode::decode_failure, "bad inference response");
            left = reply[0] == 0;
          }
          id = left ? n.left() : n.right();
        }
        result.leaves[s].push_back(id);
        margin += tree.node(id).leaf_weight;
      }
      result.margins[s] = margin;
    });
    for (std::size_t p = 0; p < passives.size(); ++p) {
      net.add_party(
          PartyId::passive(static_cast<int>(p + 1)),
          [&, p](PartyContext& ctx) -> Task<> {
            for (;;) {
              auto req = co_await ctx.recv(PartyId::active(), tags::INF_REQ);
              ByteReader r(req);
              const auto sample = r.u32();
              const auto record = static_cast<int>(r.u32());
              require(sample < passives[p].X->rows, ErrorCode::protocol, "sample out of range");
              bool left = passives[p].table->goes_left(record, passives[p].X->row(sample));
              ctx.send(PartyId::active(), tags::INF_RESP, Bytes{static_cast<std::uint8_t>(left ? 0 : 1)});
            }
          },
          true);
    }
    auto t = net.run();
    result.per_sample.push_back(simnet::account(t));
    result.transcript.append(t);
  }
  return result;
}

std::vector<int> prune_node_list(const FedTree& tree, const LookupTable& table, std::span<const double> row) {
  std::set<int> alive;
  for (int id : tree.node_ids()) alive.insert(id);
  for (const auto& n : tree.nodes) {
    if (n.is_leaf || n.owner != table.party || !alive.count(n.node_id)) continue;
    int drop = table.goes_left(n.record_id, row) ? n.right() : n.left();
    for (int k : tree.subtree(drop)) alive.erase(k);
  }
  return {alive.begin(), alive.end()};
}

InferResult psi_infer(const FedTreeModel& model, const InferenceShard& active,
                      const std::vector<InferenceShard>& passives, std::uint64_t seed) {
  check_shards(active, passives);
  InferResult result;
  const std::size_t rows = active.X->rows;
  result.margins.resize(rows);
  result.leaves.resize(rows);
  result.psi_sessions.assign(rows, 0);

  auto party_list = [&](const LookupTable& table, std::span<const double> row) {
    std::vector<std::string> out;
    for (std::size_t t = 0; t < model.trees.size(); ++t)
      for (int id : prune_node_list(model.trees[t], table, row)) out.push_back(element(t, id));
    return out;
  };

  for (std::size_t s = 0; s < rows; ++s) {
    simnet::Network net(seed + s);
    net.add_party(PartyId::active(), [&](PartyContext& ctx) -> Task<> {
      auto mine = party_list(*active.table, active.X->row(s));
      std::set<std::string> alive(mine.begin(), mine.end());
      for (std::size_t p = 0; p < passives.size(); ++p) {
        auto common = co_await psi::psi_receiver(ctx, PartyId::passive(static_cast<int>(p + 1)), mine);
        ++result.psi_sessions[s];
        std::set<std::string> next;
        for (const auto& e : common)
          if (alive.count(e)) next.insert(e);
        alive = std::move(next);
      }
      double margin = model.base_score;
      for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& tree = model.trees[t];
        // The survivors must form a single root-to-leaf chain.
        std::vector<int> chain;
        for (int id : tree.node_ids())
          if (alive.count(element(t, id))) chain.push_back(id);
        require(!chain.empty() && chain.front() == 0, ErrorCode::protocol, "PSI result misses the root");
        for (std::size_t i = 1; i < chain.size(); ++i)
          require((chain[i] - 1) / 2 == chain[i - 1], ErrorCode::protocol, "PSI result is not a chain");
        require(tree.node(chain.back()).is_leaf, ErrorCode::protocol, "PSI chain does not end at a leaf");
        result.leaves[s].push_back(chain.back());
        margin += tree.node(chain.back()).leaf_weight;
      }
      result.margins[s] = margin;
    });
    for (std::size_t p = 0; p < passives.size(); ++p) {
      net.add_party(PartyId::passive(static_cast<int>(p + 1)), [&, p](PartyContext& ctx) -> Task<> {
        co_await psi::psi_sender(ctx, PartyId::active(), party_list(*passives[p].table, passives[p].X->row(s)));
      });
    }
    auto t = net.run();
    result.per_sample.push_back(simnet::account(t));
    result.transcript.append(t);
  }
  return result;
}

}  // namespace fedfhe::secureboost
