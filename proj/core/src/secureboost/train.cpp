#include "fedfhe/secureboost/train.hpp"

#include <deque>
#include <map>
#include <numeric>
#include <set>

#include "fedfhe/common/error.hpp"
#include "fedfhe/secureboost/encrypted_hist.hpp"

namespace fedfhe::secureboost {

using simnet::PartyContext;
using simnet::Task;
namespace tags = simnet::tags;

namespace {

enum class HistMode : std::uint8_t { direct = 0, subtract = 1 };

Bytes encode_mask(std::size_t n, std::span<const std::uint32_t> ids) {
  Bytes mask((n + 7) / 8, 0);
  for (auto i : ids) mask[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return mask;
}

std::vector<std::uint32_t> decode_mask(std::span<const std::uint8_t> mask, std::size_t n) {
  require(mask.size() == (n + 7) / 8, ErrorCode::decode_failure, "instance mask has wrong length");
  std::vector<std::uint32_t> ids;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i / 8] >> (i % 8) & 1u) ids.push_back(static_cast<std::uint32_t>(i));
  return ids;
}

void write_cts(ByteWriter& w, const ckks::Context& ctx, const std::vector<ckks::Ciphertext>& cts) {
  w.u32(static_cast<std::uint32_t>(cts.size()));
  for (const auto& ct : cts) {
    auto b = ckks::serialize(ctx, ct);
    w.u32(static_cast<std::uint32_t>(b.size()));
    w.raw(b);
  }
}

std::vector<ckks::Ciphertext> read_cts(ByteReader& r, const ckks::Context& ctx) {
  std::vector<ckks::Ciphertext> cts(r.u32());
  for (auto& ct : cts) {
    auto len = r.u32();
    ct = ckks::deserialize_ciphertext(ctx, r.raw(len));
  }
  return cts;
}

void write_valid(ByteWriter& w, const std::vector<std::vector<bool>>& valid) {
  for (const auto& row : valid)
    for (std::size_t v = 0; v + 1 < row.size(); ++v) w.u8(row[v] ? 1 : 0);
}

int node_depth(int id) {
  int d = 0;
  while (id > 0) {
    id = (id - 1) / 2;
    ++d;
  }
  return d;
}

struct PassiveView {
  std::vector<std::size_t> buckets;
  GhPacking packing;
};

struct Candidate {
  std::size_t party = 0;  // 0 = active, i = passive i
  SplitChoice choice;
};

}  // namespace

ActiveKeys ActiveKeys::generate(const ckks::FheParams& params, std::uint64_t seed) {
  ActiveKeys k;
  k.ctx = ckks::Context::create(params);
  k.keys = ckks::keygen(k.ctx, seed);
  return k;
}

Task<> secureboost_active(PartyContext& net, const ActiveInput& in, ActiveOutput& out) {
  const Matrix& X = *in.X;
  const auto& config = in.config;
  config.validate();
  const std::size_t n = X.rows;
  require(in.y.size() == n, ErrorCode::invalid_argument, "row/label mismatch");
  const auto& ctx = *in.keys->ctx;
  ckks::Encryptor enc(in.keys->ctx, in.keys->keys.public_key(), net.rng().next_u64());
  ckks::Decryptor dec(in.keys->ctx, in.keys->keys.secret_key);

  out.table.party = net.id();
  out.model = {};
  out.train_margin.assign(n, out.model.base_score);
  auto index = make_buckets(X, config.epsilon);

  std::vector<simnet::PartyId> passives;
  for (std::size_t i = 1; i <= in.num_passive; ++i) passives.push_back(simnet::PartyId::passive(static_cast<int>(i)));

  // Setup: learn each passive's bucket shape, ship the fold rotation keys.
  std::vector<PassiveView> views(passives.size());
  for (std::size_t p = 0; p < passives.size(); ++p) {
    auto payload = co_await net.recv(passives[p], tags::SB_SETUP);
    ByteReader r(payload);
    views[p].buckets.resize(r.u32());
    std::size_t total = 0;
    for (auto& b : views[p].buckets) total += b = r.u16();
    views[p].packing = plan_gh_packing(n, ctx.slots(), std::max<std::size_t>(total, 1));
    auto steps = views[p].packing.fold_steps();
    auto subset = ckks::restrict_keys(*in.keys->keys.eval, steps, false);
    net.send(passives[p], tags::SB_PUBLIC_KEY, ckks::serialize(ctx, subset));
  }

  for (int t = 0; t < config.num_trees; ++t) {
    auto gh = compute_gh(in.y, out.train_margin);
    for (std::size_t p = 0; p < passives.size(); ++p) {
      std::vector<ckks::Ciphertext> cts;
      for (const auto& slots : pack_gh_blocks(gh, views[p].packing))
        cts.push_back(enc.encrypt(slots, ctx.params().scale_bits, views[p].packing.level));
      ByteWriter w;
      write_cts(w, ctx, cts);
      net.send(passives[p], tags::SB_GH, w.take());
    }

    FedTree tree;
    std::set<int> have_hist;
    std::vector<std::uint32_t> all(n);
    std::iota(all.begin(), all.end(), 0u);
    std::deque<std::pair<int, std::vector<std::uint32_t>>> queue;
    queue.emplace_back(0, std::move(all));

    while (!queue.empty()) {
      auto [id, inst] = std::move(queue.front());
      queue.pop_front();
      FedTreeNode node;
      node.node_id = id;
      const bool expandable = node_depth(id) < config.max_depth &&
                              inst.size() >= 2u * static_cast<unsigned>(config.min_samples_leaf);
      Candidate best;
      if (expandable) {
        const bool subtract = id > 0 && id % 2 == 0 && have_hist.count(id - 1);
        for (const auto& p : passives) {
          ByteWriter w;
          w.u32(static_cast<std::uint32_t>(id));
          w.u8(static_cast<std::uint8_t>(subtract ? HistMode::subtract : HistMode::direct));
          if (!subtract) w.raw(encode_mask(n, inst));
          net.send(p, tags::SB_NODE_REQ, w.take());
        }
        have_hist.insert(id);

        auto own = aggregate_plain(index, inst, gh);
        auto own_valid = valid_splits(bucket_counts(index, inst), config.min_samples_leaf);
        best.choice = best_split(own, config, &own_valid);

        for (std::size_t p = 0; p < passives.size(); ++p) {
          auto payload = co_await net.recv(passives[p], tags::SB_HIST);
          ByteReader r(payload);
          require(r.u32() == static_cast<std::uint32_t>(id), ErrorCode::protocol, "histogram for wrong node");
          auto cts = read_cts(r, ctx);
          std::vector<std::vector<double>> slots;
          for (const auto& ct : cts) slots.push_back(dec.decrypt_values(ct));
          auto hist = decode_histogram(slots, views[p].buckets, views[p].packing.block);
          std::vector<std::vector<bool>> valid(views[p].buckets.size());
          for (std::size_t k = 0; k < valid.size(); ++k) {
            valid[k].assign(views[p].buckets[k], false);
            for (std::size_t v = 0; v + 1 < views[p].buckets[k]; ++v) valid[k][v] = r.u8() != 0;
          }
          require(r.done(), ErrorCode::decode_failure, "trailing bytes in histogram");
          auto choice = best_split(hist, config, &valid);
          if (choice.gain > best.choice.gain) best = {p + 1, choice};
        }
      }

      if (!expandable || !best.choice.found() || best.choice.gain <= 0) {
        node.is_leaf = true;
        node.leaf_weight = config.learning_rate * leaf_weight(inst, gh, config.lambda);
        for (auto i : inst) out.train_margin[i] += node.leaf_weight;
        tree.nodes.push_back(node);
        continue;
      }

      node.is_leaf = false;
      std::vector<std::uint32_t> left, right;
      if (best.party == 0) {
        const auto k = static_cast<std::size_t>(best.choice.feature);
        node.owner = net.id();
        node.record_id = out.table.add({best.choice.feature, index.splits[k][best.choice.bucket]});
        for (auto i : inst) (index.bucket[k][i] <= best.choice.bucket ? left : right).push_back(i);
      } else {
        const auto& p = passives[best.party - 1];
        ByteWriter w;
        w.u32(static_cast<std::uint32_t>(id));
        w.u32(static_cast<std::uint32_t>(best.choice.feature));
        w.u32(static_cast<std::uint32_t>(best.choice.bucket));
        net.send(p, tags::SB_SPLIT, w.take());
        auto payload = co_await net.recv(p, tags::SB_PARTITION);
        ByteReader r(payload);
        node.owner = p;
        node.record_id = static_cast<int>(r.u32());
        auto goes_left = decode_mask(r.raw(r.remaining()), n);
        std::vector<bool> is_left(n, false);
        for (auto i : goes_left) is_left[i] = true;
        for (auto i : inst) (is_left[i] ? left : right).push_back(i);
      }
      tree.nodes.push_back(node);
      queue.emplace_back(node.left(), std::move(left));
      queue.emplace_back(node.right(), std::move(right));
    }

    std::sort(tree.nodes.begin(), tree.nodes.end(), [](auto& a, auto& b) { return a.node_id < b.node_id; });
    out.model.trees.push_back(std::move(tree));
    for (const auto& p : passives) net.send(p, tags::SB_DONE, Bytes{0});
  }
  for (const auto& p : passives) net.send(p, tags::SB_DONE, Bytes{1});
}

Task<> secureboost_passive(PartyContext& net, const PassiveInput& in, LookupTable& out) {
  const Matrix& X = *in.X;
  const auto active = simnet::PartyId::active();
  const std::size_t n = X.rows;
  out.party = net.id();
  auto index = make_buckets(X, in.config.epsilon);
  const auto& ctx = *in.ctx;

  {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(index.features()));
    for (std::size_t k = 0; k < index.features(); ++k) w.u16(static_cast<std::uint16_t>(index.buckets(k)));
    net.send(active, tags::SB_SETUP, w.take());
  }
  auto keys = ckks::deserialize_evaluation_keys(ctx, co_await net.recv(active, tags::SB_PUBLIC_KEY));
  auto packing = plan_gh_packing(n, ctx.slots(), std::max<std::size_t>(index.total_buckets(), 1));
  EncryptedAggregator agg(in.ctx, keys, index, packing);

  std::vector<ckks::Ciphertext> gh;
  std::map<int, std::vector<ckks::Ciphertext>> hists;
  std::map<int, std::vector<std::vector<std::uint32_t>>> counts;

  for (;;) {
    auto msg = co_await net.recv_any(active);
    ByteReader r(msg.payload);
    if (msg.tag == tags::SB_DONE) {
      hists.clear();
      counts.clear();
      gh.clear();
      if (r.u8() == 1) break;
    } else if (msg.tag == tags::SB_GH) {
      gh = read_cts(r, ctx);
    } else if (msg.tag == tags::SB_NODE_REQ) {
      const int id = static_cast<int>(r.u32());
      const auto mode = static_cast<HistMode>(r.u8());
      if (mode == HistMode::direct) {
        auto inst = decode_mask(r.raw(r.remaining()), n);
        hists[id] = agg.aggregate(gh, inst);
        counts[id] = bucket_counts(index, inst);
      } else {
        const int parent = (id - 1) / 2, left = id - 1;
        require(hists.count(parent) && hists.count(left), ErrorCode::protocol, "subtract without stored histograms");
        hists[id] = agg.subtract(hists[parent], hists[left]);
        auto c = counts[parent];
        for (std::size_t k = 0; k < c.size(); ++k)
          for (std::size_t v = 0; v < c[k].size(); ++v) c[k][v] -= counts[left][k][v];
        counts[id] = std::move(c);
      }
      ByteWriter w;
      w.u32(static_cast<std::uint32_t>(id));
      write_cts(w, ctx, hists[id]);
      write_valid(w, valid_splits(counts[id], in.config.min_samples_leaf));
      net.send(active, tags::SB_HIST, w.take());
    } else if (msg.tag == tags::SB_SPLIT) {
      r.u32();  // node id
      const auto k = r.u32();
      const auto v = r.u32();
      require(k < index.features() && v + 1 < index.buckets(k), ErrorCode::protocol, "split index out of range");
      const double threshold = index.splits[k][v];
      const int record = out.add({static_cast<int>(k), threshold});
      // Global mask; the active party intersects it with the node.
      std::vector<std::uint32_t> left;
      for (std::size_t i = 0; i < n; ++i)
        if (X(i, k) <= threshold) left.push_back(static_cast<std::uint32_t>(i));
      ByteWriter w;
      w.u32(static_cast<std::uint32_t>(record));
      w.raw(encode_mask(n, left));
      net.send(active, tags::SB_PARTITION, w.take());
    } else {
      fail(ErrorCode::protocol, std::string("unexpected tag ") + tags::name(msg.tag));
    }
  }
}

TrainResult train_ensemble(const Matrix& active_X, std::span<const int> y, const std::vector<Matrix>& passive_X,
                           const SplitConfig& config, const ActiveKeys& keys, std::uint64_t seed) {
  for (const auto& m : passive_X)
    require(m.rows == active_X.rows, ErrorCode::invalid_argument, "parties are not row-aligned");
  TrainResult result;
  result.passive_tables.resize(passive_X.size());
  ActiveInput ain{&active_X, y, &keys, config, passive_X.size()};
  ActiveOutput aout;
  std::vector<PassiveInput> pins;
  for (const auto& m : passive_X) pins.push_back({&m, keys.ctx, config});

  simnet::Network net(seed);
  net.add_party(simnet::PartyId::active(),
                [&](PartyContext& ctx) -> Task<> { co_await secureboost_active(ctx, ain, aout); });
  for (std::size_t i = 0; i < passive_X.size(); ++i)
    net.add_party(simnet::PartyId::passive(static_cast<int>(i + 1)), [&, i](PartyContext& ctx) -> Task<> {
      co_await secureboost_passive(ctx, pins[i], result.passive_tables[i]);
    });
  result.transcript = net.run();
  result.model = std::move(aout.model);
  result.active_table = std::move(aout.table);
  result.train_margin = std::move(aout.train_margin);
  return result;
}

}  // namespace fedfhe::secureboost
