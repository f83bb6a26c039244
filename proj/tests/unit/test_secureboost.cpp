#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "fedfhe/secureboost/secureboost.hpp"
#include "support/fixtures.hpp"

using namespace fedfhe;
using namespace fedfhe::secureboost;
using fedfhe::testing::desk;

namespace {

const simnet::PartyId A = simnet::PartyId::active();
const simnet::PartyId P1 = simnet::PartyId::passive(1);

double logistic_loss(int y, double m) {
  double p = sigmoid(m);
  return -(y * std::log(p) + (1 - y) * std::log(1 - p));
}

std::vector<std::uint32_t> iota_ids(std::size_t n) {
  std::vector<std::uint32_t> v(n);
  std::iota(v.begin(), v.end(), 0u);
  return v;
}

const ActiveKeys& active_keys() {
  static const ActiveKeys k{desk().ctx, desk().keys};
  return k;
}

struct VerticalData {
  Matrix active, passive, joined;
  std::vector<int> y;
};

VerticalData synthetic(std::size_t n, std::uint64_t seed) {
  VerticalData d;
  d.active = fedfhe::testing::random_matrix(n, 2, -3, 3, seed);
  d.passive = fedfhe::testing::random_matrix(n, 3, -3, 3, seed + 1);
  d.joined = Matrix(n, 5);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < 2; ++k) d.joined(i, k) = d.active(i, k);
    for (std::size_t k = 0; k < 3; ++k) d.joined(i, 2 + k) = d.passive(i, k);
    d.y.push_back(d.passive(i, 0) + 0.5 * d.active(i, 1) > 0.3 ? 1 : 0);
  }
  return d;
}

std::shared_ptr<const ckks::EvaluationKeys> eval_keys() { return desk().keys.eval; }

std::vector<double> decrypt_hist_group(const ckks::Ciphertext& ct) {
  ckks::Decryptor dec(desk().ctx, desk().keys.secret_key);
  return dec.decrypt_values(ct);
}

HistogramPair encrypted_histogram(const BucketIndex& index, const std::vector<GhPair>& gh,
                                  const std::vector<std::uint32_t>& inst, std::uint64_t seed,
                                  std::vector<ckks::Ciphertext>* parent_out = nullptr,
                                  const std::vector<ckks::Ciphertext>* subtract_from = nullptr) {
  auto packing = plan_gh_packing(gh.size(), desk().ctx->slots(), index.total_buckets());
  ckks::Encryptor enc(desk().ctx, desk().keys.public_key(), seed);
  std::vector<ckks::Ciphertext> cts;
  for (const auto& s : pack_gh_blocks(gh, packing)) cts.push_back(enc.encrypt(s, 40, packing.level));
  EncryptedAggregator agg(desk().ctx, eval_keys(), index, packing);
  auto out = agg.aggregate(cts, inst);
  if (subtract_from) out = agg.subtract(*subtract_from, out);
  if (parent_out) *parent_out = out;
  std::vector<std::vector<double>> slots;
  for (const auto& ct : out) slots.push_back(decrypt_hist_group(ct));
  return decode_histogram(slots, bucket_sizes(index), packing.block);
}

void expect_hist_near(const HistogramPair& a, const HistogramPair& b, double tol) {
  ASSERT_TRUE(a.same_shape(b));
  for (std::size_t k = 0; k < a.G.size(); ++k)
    for (std::size_t v = 0; v < a.G[k].size(); ++v) {
      EXPECT_NEAR(a.G[k][v], b.G[k][v], tol * std::max(1.0, std::abs(b.G[k][v])));
      EXPECT_NEAR(a.H[k][v], b.H[k][v], tol * std::max(1.0, std::abs(b.H[k][v])));
    }
}

// Worked example tree: passive owns f0..f9 (local index = f), active owns f10..f19
// (local index = f - 10). Heap-numbered depth-3 tree, leaves 7..14 = w1..w8.
struct WorkedTree {
  FedTreeModel model;
  LookupTable passive, active;
  Matrix xp{1, 10}, xa{1, 10};

  WorkedTree() {
    passive.party = P1;
    active.party = A;
    FedTree t;
    auto internal = [&](int id, LookupTable& table, int feature, double thr) {
      FedTreeNode n;
      n.node_id = id;
      n.is_leaf = false;
      n.owner = table.party;
      n.record_id = table.add({feature, thr});
      t.nodes.push_back(n);
    };
    internal(0, passive, 1, 15);
    internal(1, active, 15 - 10, 6);
    internal(2, passive, 8, 20);
    internal(3, active, 12 - 10, 3);
    internal(4, passive, 2, 7);
    internal(5, passive, 5, 25);
    internal(6, active, 13 - 10, 40);
    for (int id = 7; id <= 14; ++id) {
      FedTreeNode leaf;
      leaf.node_id = id;
      leaf.leaf_weight = 0.1 * (id - 6);  // w1..w8
      t.nodes.push_back(leaf);
    }
    std::sort(t.nodes.begin(), t.nodes.end(), [](auto& a, auto& b) { return a.node_id < b.node_id; });
    model.trees.push_back(t);
    xp(0, 1) = 13;
    xp(0, 2) = 10;
    xp(0, 5) = 30;
    xp(0, 8) = 10;
    xa(0, 12 - 10) = 5;
    xa(0, 13 - 10) = 50;
    xa(0, 15 - 10) = 10;
  }
};

}  // namespace

TEST(Gradients, LogisticAtZeroMargin) {
  std::vector<int> y{1, 0};
  std::vector<double> m{0, 0};
  auto gh = compute_gh(y, m);
  EXPECT_DOUBLE_EQ(gh[0].g, -0.5);
  EXPECT_DOUBLE_EQ(gh[0].h, 0.25);
  EXPECT_DOUBLE_EQ(gh[1].g, 0.5);
  EXPECT_DOUBLE_EQ(gh[1].h, 0.25);
}

TEST(Gradients, MatchFiniteDifferences) {
  Prng rng(1);
  std::vector<int> y;
  std::vector<double> m;
  for (int i = 0; i < 200; ++i) {
    y.push_back(static_cast<int>(rng.uniform(2)));
    m.push_back(rng.uniform_real(-6, 6));
  }
  auto gh = compute_gh(y, m);
  const double e = 1e-3;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double fp = logistic_loss(y[i], m[i] + e), f0 = logistic_loss(y[i], m[i]), fm = logistic_loss(y[i], m[i] - e);
    EXPECT_NEAR(gh[i].g, (fp - fm) / (2 * e), 1e-6);
    EXPECT_NEAR(gh[i].h, (fp - 2 * f0 + fm) / (e * e), 1e-6);
    EXPECT_GT(gh[i].h, 0.0);
    EXPECT_LE(gh[i].h, 0.25);
  }
  EXPECT_THROW(compute_gh(std::vector<int>{1}, std::vector<double>{}), Error);
}

TEST(Quantiles, QuartilesOfOneToEight) {
  std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8};
  EXPECT_EQ(quantile_splits(v, 0.25), (std::vector<double>{2.5, 4.5, 6.5}));
}

TEST(Quantiles, ConstantColumnHasNoCandidates) {
  std::vector<double> v(10, 3.0);
  EXPECT_TRUE(quantile_splits(v, 0.125).empty());
  EXPECT_THROW(quantile_splits(std::vector<double>{}, 0.5), Error);
}

TEST(Quantiles, EqualCountBuckets) {
  auto v = fedfhe::testing::random_values(100, -1, 1, 2);
  auto s = quantile_splits(v, 0.125);
  ASSERT_EQ(s.size(), 7u);
  std::vector<int> counts(8, 0);
  for (double x : v) ++counts[bucket_of(s, x)];
  auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  EXPECT_LE(*hi - *lo, 1);
}

TEST(Quantiles, TiesAreDeterministic) {
  std::vector<double> v{1, 1, 1, 1, 2, 2, 3, 3};
  auto s = quantile_splits(v, 0.25);
  EXPECT_EQ(s, (std::vector<double>{1.5, 2.5}));
  EXPECT_EQ(s, quantile_splits(std::vector<double>{3, 2, 1, 3, 1, 2, 1, 1}, 0.25));
}

TEST(EncryptedHistogram, FourSamplesTwoBuckets) {
  Matrix x(4, 1);
  x.data = {1, 2, 3, 4};
  auto index = make_buckets(x, 0.5);
  ASSERT_EQ(index.buckets(0), 2u);
  std::vector<GhPair> gh{{1, 0.1}, {2, 0.2}, {3, 0.3}, {4, 0.4}};
  auto hist = encrypted_histogram(index, gh, iota_ids(4), 1);
  const double tol = 0x1.0p-18;
  EXPECT_NEAR(hist.G[0][0], 3, tol * 3);
  EXPECT_NEAR(hist.G[0][1], 7, tol * 7);
  EXPECT_NEAR(hist.H[0][0], 0.3, tol);
  EXPECT_NEAR(hist.H[0][1], 0.7, tol);
}

TEST(EncryptedHistogram, SingleAndEmptyBuckets) {
  Matrix x(4, 2);
  x.data = {5, 1, 5, 2, 5, 3, 5, 4};  // feature 0 constant
  auto index = make_buckets(x, 0.5);
  ASSERT_EQ(index.buckets(0), 1u);
  std::vector<GhPair> gh{{1, 0.1}, {2, 0.2}, {3, 0.3}, {4, 0.4}};
  std::vector<std::uint32_t> low{0, 1};
  auto hist = encrypted_histogram(index, gh, low, 2);
  EXPECT_NEAR(hist.G[0][0], 3, 1e-5);
  EXPECT_NEAR(hist.G[1][1], 0, 1e-5);
  EXPECT_NEAR(hist.H[1][1], 0, 1e-5);
  auto none = encrypted_histogram(index, gh, {}, 3);
  EXPECT_NEAR(none.G[0][0], 0, 1e-5);
}

TEST(EncryptedHistogram, MatchesPlaintextAndConserves) {
  auto x = fedfhe::testing::random_matrix(300, 6, -5, 5, 4);
  auto index = make_buckets(x, 0.125);
  std::vector<int> y;
  Prng rng(5);
  std::vector<double> m;
  for (int i = 0; i < 300; ++i) {
    y.push_back(static_cast<int>(rng.uniform(2)));
    m.push_back(rng.uniform_real(-2, 2));
  }
  auto gh = compute_gh(y, m);
  std::vector<std::uint32_t> inst;
  for (std::uint32_t i = 0; i < 300; ++i)
    if (rng.uniform(3) != 0) inst.push_back(i);
  auto enc = encrypted_histogram(index, gh, inst, 6);
  auto plain = aggregate_plain(index, inst, gh);
  expect_hist_near(enc, plain, 0x1.0p-18);
  double g = 0, h = 0;
  for (auto i : inst) g += gh[i].g, h += gh[i].h;
  for (std::size_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(std::accumulate(enc.G[k].begin(), enc.G[k].end(), 0.0), g, 1e-4);
    EXPECT_NEAR(std::accumulate(enc.H[k].begin(), enc.H[k].end(), 0.0), h, 1e-4);
  }
}

TEST(EncryptedHistogram, FeatureGroupsSplitWideParties) {
  auto groups = plan_feature_groups(std::vector<std::size_t>(40, 8), 256);
  EXPECT_EQ(groups.features.size(), 3u);
  EXPECT_EQ(groups.offset[16], 0u);
  EXPECT_EQ(groups.group_of[39], 2u);
  auto packing = plan_gh_packing(569, 4096, 31 * 8);
  EXPECT_EQ(packing.block, 512u);
  EXPECT_EQ(packing.per_ct, 8u);
  EXPECT_EQ(packing.ciphertexts(), 72u);
  EXPECT_EQ(packing.fold_steps(), (std::vector<int>{512, 1024, 2048}));
}

TEST(SiblingSubtract, PlaintextIdentities) {
  auto x = fedfhe::testing::random_matrix(16, 2, 0, 1, 7);
  auto index = make_buckets(x, 0.25);
  std::vector<GhPair> gh(16);
  for (std::size_t i = 0; i < 16; ++i) gh[i] = {0.1 * static_cast<double>(i) - 0.7, 0.2};
  auto parent = aggregate_plain(index, iota_ids(16), gh);
  auto zero = sibling_subtract(parent, parent);
  for (const auto& row : zero.G)
    for (double v : row) EXPECT_DOUBLE_EQ(v, 0.0);
  auto empty = aggregate_plain(index, {}, gh);
  auto same = sibling_subtract(parent, empty);
  EXPECT_EQ(same.G, parent.G);
  HistogramPair bad;
  EXPECT_THROW(sibling_subtract(parent, bad), Error);
}

TEST(SiblingSubtract, EncryptedMatchesDirectRightChild) {
  auto x = fedfhe::testing::random_matrix(16, 3, -1, 1, 8);
  auto index = make_buckets(x, 0.25);
  std::vector<GhPair> gh(16);
  Prng rng(9);
  for (auto& p : gh) p = {rng.uniform_real(-1, 1), rng.uniform_real(0.01, 0.25)};
  std::vector<std::uint32_t> left, right;
  for (std::uint32_t i = 0; i < 16; ++i) (rng.uniform(2) ? left : right).push_back(i);

  std::vector<ckks::Ciphertext> parent;
  encrypted_histogram(index, gh, iota_ids(16), 10, &parent);
  auto derived = encrypted_histogram(index, gh, left, 10, nullptr, &parent);
  auto direct = aggregate_plain(index, right, gh);
  expect_hist_near(derived, direct, 2 * 0x1.0p-18);
}

TEST(BestSplit, SeparableToyMatchesExhaustiveSearch) {
  std::vector<double> f{-3, -2, -1, 1, 2, 3};
  std::vector<int> y{0, 0, 0, 1, 1, 1};
  Matrix x(6, 1);
  x.data = f;
  auto gh = compute_gh(y, std::vector<double>(6, 0.0));
  SplitConfig cfg;
  cfg.min_samples_leaf = 1;
  auto index = make_buckets(x, cfg.epsilon);
  auto choice = best_split(aggregate_plain(index, iota_ids(6), gh), cfg);
  ASSERT_TRUE(choice.found());
  EXPECT_DOUBLE_EQ(index.splits[0][choice.bucket], 0.0);

  // Exhaustive: every cut between consecutive sorted samples.
  double g = 0, h = 0, best = -1e300;
  for (auto p : gh) g += p.g, h += p.h;
  double gl = 0, hl = 0;
  for (std::size_t i = 0; i + 1 < 6; ++i) {
    gl += gh[i].g;
    hl += gh[i].h;
    best = std::max(best, split_gain(gl, hl, g, h, cfg));
  }
  EXPECT_NEAR(choice.gain, best, 1e-12);
}

TEST(BestSplit, NoSignalMeansLeaf) {
  HistogramPair hist;
  hist.G = {{0, 0, 0}};
  hist.H = {{0.25, 0.25, 0.25}};
  SplitConfig cfg;
  cfg.gamma = 0.3;
  EXPECT_DOUBLE_EQ(best_split(hist, cfg).gain, -0.3);
  hist.G = {{-1, 0, 1}};
  cfg.lambda = 1e12;
  EXPECT_NEAR(best_split(hist, cfg).gain, -0.3, 1e-9);
}

TEST(LeafWeight, ClosedForm) {
  std::vector<GhPair> gh{{0.5, 0.5}, {-0.5, 0.5}};
  EXPECT_DOUBLE_EQ(leaf_weight(iota_ids(2), gh, 1.0), 0.0);
  std::vector<GhPair> one{{1.0, 1.0}};
  EXPECT_DOUBLE_EQ(leaf_weight(iota_ids(1), one, 1.0), -0.5);
  EXPECT_THROW(leaf_weight({}, gh, 1.0), Error);
}

TEST(LeafWeight, MinimizesQuadraticObjective) {
  Prng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<GhPair> gh(30);
    for (auto& p : gh) p = {rng.uniform_real(-1, 1), rng.uniform_real(0.01, 0.25)};
    double lambda = rng.uniform_real(0, 3);
    auto obj = [&](long double w) {
      long double s = 0.5L * lambda * w * w;
      for (auto p : gh) s += p.g * w + 0.5L * p.h * w * w;
      return s;
    };
    // Bisection on the sign of the objective's symmetric difference.
    long double lo = -50, hi = 50;
    for (int it = 0; it < 200; ++it) {
      long double mid = (lo + hi) / 2;
      (obj(mid + 1e-6L) > obj(mid - 1e-6L) ? hi : lo) = mid;
    }
    EXPECT_NEAR(leaf_weight(iota_ids(30), gh, lambda), static_cast<double>((lo + hi) / 2), 1e-9);
  }
}

TEST(Training, FederatedStumpEqualsPlaintextStump) {
  Matrix active(6, 1), passive(6, 1);
  active.data = {0.5, -0.2, 0.1, 0.4, -0.3, 0.2};
  passive.data = {-3, -2, -1, 1, 2, 3};
  std::vector<int> y{0, 0, 0, 1, 1, 1};
  SplitConfig cfg;
  cfg.num_trees = 1;
  cfg.max_depth = 1;
  auto res = train_ensemble(active, y, {passive}, cfg, active_keys(), 1);

  Matrix joined(6, 2);
  for (std::size_t i = 0; i < 6; ++i) joined(i, 0) = active(i, 0), joined(i, 1) = passive(i, 0);
  auto plain = train_plain(joined, y, cfg);

  ASSERT_EQ(res.model.trees.size(), 1u);
  const auto& root = res.model.trees[0].node(0);
  ASSERT_FALSE(root.is_leaf);
  EXPECT_EQ(root.owner, P1);
  EXPECT_EQ(root.record_id, 1);
  EXPECT_EQ(plain.trees[0].nodes[0].feature, 1);
  EXPECT_DOUBLE_EQ(res.passive_tables[0].at(1).threshold, plain.trees[0].nodes[0].threshold);
  EXPECT_TRUE(res.active_table.records.empty());
  EXPECT_NEAR(res.model.trees[0].node(1).leaf_weight, plain.trees[0].nodes[1].leaf, 1e-6);
  EXPECT_NEAR(res.model.trees[0].node(2).leaf_weight, plain.trees[0].nodes[2].leaf, 1e-6);
}

TEST(Training, ZeroTreesPredictBaseScore) {
  auto d = synthetic(16, 12);
  SplitConfig cfg;
  cfg.num_trees = 0;
  auto res = train_ensemble(d.active, d.y, {d.passive}, cfg, active_keys(), 2);
  EXPECT_TRUE(res.model.trees.empty());
  auto inf = classic_infer(res.model, {&res.active_table, &d.active}, {{&res.passive_tables[0], &d.passive}});
  for (double m : inf.margins) EXPECT_EQ(m, 0.0);
}

TEST(Training, MatchesPlaintextEnsembleAndInferenceAgrees) {
  auto d = synthetic(96, 13);
  SplitConfig cfg;
  cfg.num_trees = 3;
  cfg.max_depth = 3;
  auto res = train_ensemble(d.active, d.y, {d.passive}, cfg, active_keys(), 3);
  auto plain = train_plain(d.joined, d.y, cfg);

  // Same structure and leaves as the centralized trainer.
  ASSERT_EQ(res.model.trees.size(), plain.trees.size());
  for (std::size_t t = 0; t < plain.trees.size(); ++t)
    for (const auto& n : res.model.trees[t].nodes) {
      ASSERT_TRUE(plain.trees[t].has(n.node_id));
      const auto& pn = plain.trees[t].nodes[n.node_id];
      ASSERT_EQ(n.is_leaf, pn.is_leaf) << "tree " << t << " node " << n.node_id;
      if (n.is_leaf) {
        EXPECT_NEAR(n.leaf_weight, pn.leaf, 1e-6);
      } else {
        const auto& table = n.owner == A ? res.active_table : res.passive_tables[0];
        const int offset = n.owner == A ? 0 : 2;
        EXPECT_EQ(table.at(n.record_id).feature + offset, pn.feature);
        EXPECT_DOUBLE_EQ(table.at(n.record_id).threshold, pn.threshold);
      }
    }

  InferenceShard as{&res.active_table, &d.active};
  std::vector<InferenceShard> ps{{&res.passive_tables[0], &d.passive}};
  auto classic = classic_infer(res.model, as, ps, 4);
  auto via_psi = psi_infer(res.model, as, ps, 5);
  for (std::size_t s = 0; s < d.y.size(); ++s) {
    const auto ra = d.active.row(s), rp = d.passive.row(s);
    std::vector<PartyView> views{{&res.active_table, ra}, {&res.passive_tables[0], rp}};
    double central = centralized_margin(res.model, views);
    EXPECT_EQ(classic.margins[s], central);
    EXPECT_EQ(via_psi.margins[s], central);
    EXPECT_EQ(classic.leaves[s], via_psi.leaves[s]);
    EXPECT_NEAR(res.train_margin[s], central, 1e-12);
    EXPECT_EQ(via_psi.psi_sessions[s], 1u);

    // Classic rounds equal passive-owned internal nodes on the realized path.
    std::uint64_t passive_nodes = 0;
    for (std::size_t t = 0; t < res.model.trees.size(); ++t) {
      auto path = centralized_path(res.model.trees[t], views);
      for (int id : path) {
        const auto& n = res.model.trees[t].node(id);
        if (!n.is_leaf && n.owner == P1) ++passive_nodes;
      }
    }
    EXPECT_EQ(classic.per_sample[s].by_tag[simnet::tags::INF_REQ].messages, passive_nodes);
    EXPECT_EQ(classic.per_sample[s].rounds, passive_nodes);
    EXPECT_EQ(via_psi.per_sample[s].messages, 3u);
  }
}

TEST(Training, TranscriptIsDeterministic) {
  auto d = synthetic(32, 14);
  SplitConfig cfg;
  cfg.num_trees = 1;
  cfg.max_depth = 2;
  auto r1 = train_ensemble(d.active, d.y, {d.passive}, cfg, active_keys(), 7);
  auto r2 = train_ensemble(d.active, d.y, {d.passive}, cfg, active_keys(), 7);
  EXPECT_EQ(r1.transcript.digest(), r2.transcript.digest());
  auto acc = simnet::account(r1.transcript);
  EXPECT_EQ(acc.by_tag[simnet::tags::SB_SETUP].messages, 1u);
  EXPECT_EQ(acc.by_tag[simnet::tags::SB_GH].messages, 1u);
}

TEST(Training, TwoPassiveParties) {
  auto d = synthetic(48, 15);
  Matrix p2(48, 1);
  for (std::size_t i = 0; i < 48; ++i) p2(i, 0) = d.passive(i, 0);
  Matrix p1(48, 2);
  for (std::size_t i = 0; i < 48; ++i) p1(i, 0) = d.passive(i, 1), p1(i, 1) = d.passive(i, 2);
  SplitConfig cfg;
  cfg.num_trees = 2;
  cfg.max_depth = 2;
  auto res = train_ensemble(d.active, d.y, {p1, p2}, cfg, active_keys(), 8);
  InferenceShard as{&res.active_table, &d.active};
  std::vector<InferenceShard> ps{{&res.passive_tables[0], &p1}, {&res.passive_tables[1], &p2}};
  auto classic = classic_infer(res.model, as, ps);
  auto via_psi = psi_infer(res.model, as, ps);
  for (std::size_t s = 0; s < 48; ++s) {
    EXPECT_EQ(classic.margins[s], via_psi.margins[s]);
    EXPECT_EQ(via_psi.psi_sessions[s], 2u);
  }
}

TEST(Inference, ClassicRoutesRightThenCountsPassiveRounds) {
  LookupTable passive, active;
  passive.party = P1;
  active.party = A;
  FedTree t;
  auto add_internal = [&](int id, LookupTable& table, int f, double thr) {
    FedTreeNode n;
    n.node_id = id;
    n.is_leaf = false;
    n.owner = table.party;
    n.record_id = table.add({f, thr});
    t.nodes.push_back(n);
  };
  add_internal(0, passive, 1, 14);  // [party 0, record 1]: f1 <= 14
  add_internal(2, active, 0, 0.5);  // Node 2 on the active side
  add_internal(6, passive, 3, 2.0);
  for (int id : {1, 5, 13, 14}) {
    FedTreeNode leaf;
    leaf.node_id = id;
    leaf.leaf_weight = id;
    t.nodes.push_back(leaf);
  }
  std::sort(t.nodes.begin(), t.nodes.end(), [](auto& a, auto& b) { return a.node_id < b.node_id; });
  FedTreeModel model;
  model.trees.push_back(t);
  Matrix xp(1, 4), xa(1, 1);
  xp(0, 1) = 29;
  xp(0, 3) = 1;
  xa(0, 0) = 3;
  auto r = classic_infer(model, {&active, &xa}, {{&passive, &xp}});
  EXPECT_EQ(r.leaves[0], std::vector<int>{13});
  EXPECT_EQ(r.per_sample[0].rounds, 2u);
  EXPECT_EQ(r.per_sample[0].by_tag[simnet::tags::INF_REQ].messages, 2u);
}

TEST(Inference, NoPassiveNodesNoRounds) {
  LookupTable passive, active;
  passive.party = P1;
  active.party = A;
  FedTree t;
  FedTreeNode root;
  root.is_leaf = false;
  root.owner = A;
  root.record_id = active.add({0, 0.0});
  t.nodes.push_back(root);
  for (int id : {1, 2}) {
    FedTreeNode leaf;
    leaf.node_id = id;
    t.nodes.push_back(leaf);
  }
  FedTreeModel model;
  model.trees.push_back(t);
  Matrix xa(3, 1), xp(3, 1);
  xa.data = {-1, 0, 1};
  auto r = classic_infer(model, {&active, &xa}, {{&passive, &xp}});
  for (const auto& acc : r.per_sample) EXPECT_EQ(acc.rounds, 0u);
  EXPECT_EQ(r.leaves[2], std::vector<int>{2});
}

TEST(Inference, WorkedExampleNodeListsAndIntersection) {
  WorkedTree f;
  const auto& tree = f.model.trees[0];
  EXPECT_EQ(prune_node_list(tree, f.passive, f.xp.row(0)), (std::vector<int>{0, 1, 3, 4, 7, 8, 10}));
  EXPECT_EQ(prune_node_list(tree, f.active, f.xa.row(0)), (std::vector<int>{0, 1, 2, 4, 5, 6, 9, 10, 11, 12, 14}));
  auto r = psi_infer(f.model, {&f.active, &f.xa}, {{&f.passive, &f.xp}});
  EXPECT_EQ(r.leaves[0], std::vector<int>{10});
  EXPECT_NEAR(r.margins[0], 0.4, 1e-15);  // w4
  EXPECT_EQ(r.psi_sessions[0], 1u);
  auto classic = classic_infer(f.model, {&f.active, &f.xa}, {{&f.passive, &f.xp}});
  EXPECT_EQ(classic.leaves[0], std::vector<int>{10});
}

TEST(Inference, SingleLeafTree) {
  FedTree t;
  t.nodes.push_back(FedTreeNode{});
  FedTreeModel model;
  model.trees.push_back(t);
  LookupTable a, p;
  a.party = A;
  p.party = P1;
  Matrix xa(1, 1), xp(1, 1);
  EXPECT_EQ(prune_node_list(t, p, xp.row(0)), std::vector<int>{0});
  auto r = psi_infer(model, {&a, &xa}, {{&p, &xp}});
  EXPECT_EQ(r.leaves[0], std::vector<int>{0});
}

TEST(Inference, UnknownRecordIsError) {
  WorkedTree f;
  LookupTable empty;
  empty.party = P1;
  EXPECT_THROW(classic_infer(f.model, {&f.active, &f.xa}, {{&empty, &f.xp}}), Error);
}

TEST(ModelIo, JsonRoundTrip) {
  WorkedTree f;
  auto dir = std::filesystem::temp_directory_path() / "fedfhe_sb_model";
  std::filesystem::create_directories(dir);
  save_model((dir / "model.json").string(), f.model);
  save_lookup((dir / "passive1.json").string(), f.passive);
  auto m = load_model((dir / "model.json").string());
  auto t = load_lookup((dir / "passive1.json").string());
  EXPECT_EQ(to_json(m), to_json(f.model));
  EXPECT_EQ(to_json(t), to_json(f.passive));
  auto shared = to_json(f.model).dump();
  EXPECT_EQ(shared.find("threshold"), std::string::npos);
  EXPECT_THROW(model_from_json(nlohmann::json{{"format", "x"}}), Error);
}
