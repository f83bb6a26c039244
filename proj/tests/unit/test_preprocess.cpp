#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fedfhe/logreg/federated.hpp"
#include "fedfhe/preprocess/preprocess.hpp"
#include "support/fixtures.hpp"

using namespace fedfhe;
using namespace fedfhe::preprocess;
using fedfhe::testing::desk;
using fedfhe::testing::random_matrix;

namespace {

std::vector<int> random_labels(std::size_t n, double positive, std::uint64_t seed) {
  Prng prng(seed);
  std::vector<int> y(n);
  for (auto& v : y) v = prng.uniform01() < positive ? 1 : 0;
  return y;
}

std::set<std::uint16_t> tags_received_by(const simnet::Transcript& t, simnet::PartyId who) {
  std::set<std::uint16_t> out;
  for (const auto& m : t.messages)
    if (m.to == who) out.insert(m.tag);
  return out;
}

}  // namespace

TEST(Binning, FormulaOneBinMatrix) {
  const std::vector<double> x{1, 2, 2, 3, 1};
  auto spec = equal_width_bins(x, 3);
  auto m = one_hot(x, spec);
  Matrix expect(5, 3);
  for (auto [i, b] : {std::pair{0, 0}, {1, 1}, {2, 1}, {3, 2}, {4, 0}}) expect(i, b) = 1.0;
  EXPECT_EQ(m.onehot, expect);
  EXPECT_EQ(m.populations(), (std::vector<std::size_t>{2, 2, 1}));
}

TEST(Binning, RightClosedExceptFirst) {
  BinSpec s{0, {0.0, 1.0, 2.0, 3.0}};
  EXPECT_EQ(s.bin_of(0.0), 0u);
  EXPECT_EQ(s.bin_of(1.0), 0u);
  EXPECT_EQ(s.bin_of(1.0000001), 1u);
  EXPECT_EQ(s.bin_of(3.0), 2u);
  EXPECT_EQ(s.bin_of(-5.0), 0u);
  EXPECT_EQ(s.bin_of(7.0), 2u);
}

TEST(Binning, RowsSumToOneAndColumnsCount) {
  auto X = random_matrix(300, 4, -3, 3, 1);
  for (const auto& spec : equal_width_bins(X, 7)) {
    auto v = column(X, spec.feature);
    auto m = one_hot(v, spec);
    EXPECT_EQ(spec.edges.front(), *std::min_element(v.begin(), v.end()));
    EXPECT_EQ(spec.edges.back(), *std::max_element(v.begin(), v.end()));
    std::vector<std::size_t> hist(7, 0);
    for (double x : v) {
      std::size_t b = 0;
      while (b + 1 < 7 && x > spec.edges[b + 1]) ++b;
      ++hist[b];
    }
    for (std::size_t i = 0; i < 300; ++i) {
      double s = 0;
      for (std::size_t b = 0; b < 7; ++b) s += m.onehot(i, b);
      EXPECT_EQ(s, 1.0);
    }
    EXPECT_EQ(m.populations(), hist);
  }
}

TEST(Binning, RejectsConstantFeatureAndTooFewBins) {
  std::vector<double> flat(10, 2.5), x{1, 2, 3};
  EXPECT_THROW(equal_width_bins(flat, 4), Error);
  EXPECT_THROW(equal_width_bins(x, 1), Error);
}

TEST(Woe, FormulaOneExample) {
  const std::vector<double> x{1, 2, 2, 3, 1};
  const std::vector<int> y{1, 0, 1, 1, 0};
  auto spec = equal_width_bins(x, 3);
  auto t = woe_plain(spec, one_hot(x, spec), y);
  EXPECT_EQ(t.good, (std::vector<std::uint64_t>{1, 1, 1}));
  EXPECT_EQ(t.bad, (std::vector<std::uint64_t>{1, 1, 0}));
  EXPECT_EQ(t.good_total, 3u);
  EXPECT_EQ(t.bad_total, 2u);
  EXPECT_NEAR(t.woe[0], std::log((1.0 / 3) / (1.0 / 2)), 1e-15);
  EXPECT_NEAR(t.woe[1], std::log((1.0 / 3) / (1.0 / 2)), 1e-15);
  EXPECT_NEAR(t.woe[2], std::log((1.0 / 3) / (0.5 / 2)), 1e-15);
}

TEST(Woe, EqualSharesGiveZero) {
  const std::vector<double> x{0, 0, 1, 1, 1, 1};
  const std::vector<int> y{1, 0, 1, 1, 0, 0};
  auto spec = equal_width_bins(x, 2);
  auto t = woe_plain(spec, one_hot(x, spec), y);
  EXPECT_NEAR(t.woe[0], 0.0, 1e-15);
  EXPECT_NEAR(t.woe[1], 0.0, 1e-15);
}

TEST(Woe, SwappingLabelsNegates) {
  auto X = random_matrix(200, 1, 0, 1, 2);
  auto y = random_labels(200, 0.3, 3);
  auto v = column(X, 0);
  auto spec = equal_width_bins(v, 12);
  auto m = one_hot(v, spec);
  std::vector<int> flipped(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) flipped[i] = 1 - y[i];
  auto a = woe_plain(spec, m, y), b = woe_plain(spec, m, flipped);
  for (std::size_t i = 0; i < 12; ++i) EXPECT_NEAR(a.woe[i], -b.woe[i], 1e-12);
}

TEST(Woe, RequiresBothClasses) {
  const std::vector<double> x{1, 2, 3};
  auto spec = equal_width_bins(x, 2);
  EXPECT_THROW(woe_plain(spec, one_hot(x, spec), std::vector<int>{1, 1, 1}), Error);
  EXPECT_THROW(woe_plain(spec, one_hot(x, spec), std::vector<int>{0, 0, 0}), Error);
  EXPECT_THROW(woe_plain(spec, one_hot(x, spec), std::vector<int>{0, 2, 1}), Error);
}

TEST(Woe, JsonRoundTripAndEncode) {
  auto X = random_matrix(50, 2, -1, 1, 4);
  auto y = random_labels(50, 0.5, 5);
  std::vector<WoeTable> tables;
  for (const auto& spec : equal_width_bins(X, 4)) {
    auto t = woe_plain(spec, one_hot(column(X, spec.feature), spec), y);
    auto back = woe_table_from_json(to_json(t));
    EXPECT_EQ(back.good, t.good);
    EXPECT_EQ(back.woe, t.woe);
    EXPECT_EQ(back.spec.edges, t.spec.edges);
    tables.push_back(t);
  }
  auto enc = woe_encode(X, tables);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(enc(i, j), tables[j].woe[tables[j].spec.bin_of(X(i, j))]);
  auto bad = to_json(tables[0]);
  bad["good_total"] = 999;
  EXPECT_THROW(woe_table_from_json(bad), Error);
}

TEST(WoeFhe, MatchesPlainOnJoinedData) {
  const auto& k = desk();
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto XB = random_matrix(180 + 40 * seed, 3, -2, 2, 10 + seed);
    auto y = random_labels(XB.rows, 0.35, 20 + seed);
    auto res = woe_fhe(y, XB, 8, k.ctx, k.keys, seed);
    ASSERT_EQ(res.tables.size(), 3u);
    EXPECT_LT(res.rounding_error, 1e-3);
    for (std::size_t j = 0; j < 3; ++j) {
      auto spec = equal_width_bins(column(XB, j), 8, j);
      auto plain = woe_plain(spec, one_hot(column(XB, j), spec), y);
      EXPECT_EQ(res.tables[j].good, plain.good);
      EXPECT_EQ(res.tables[j].bad, plain.bad);
      for (std::size_t b = 0; b < 8; ++b) EXPECT_NEAR(res.tables[j].woe[b], plain.woe[b], 1e-3);
    }
  }
}

// More bin columns than fit in one group, more samples than one chunk.
TEST(WoeFhe, SeveralGroupsAndChunks) {
  const auto& k = desk();
  auto XB = random_matrix(5000, 6, 0, 1, 30);
  auto y = random_labels(5000, 0.2, 31);
  auto res = woe_fhe(y, XB, 10, k.ctx, k.keys, 4);
  for (std::size_t j = 0; j < 6; ++j) {
    auto spec = equal_width_bins(column(XB, j), 10, j);
    EXPECT_EQ(res.tables[j].good, woe_plain(spec, one_hot(column(XB, j), spec), y).good);
  }
}

TEST(WoeFhe, SingleBinCountsEveryPositive) {
  const auto& k = desk();
  auto XB = random_matrix(64, 1, 0, 1, 32);
  auto y = random_labels(64, 0.5, 33);
  // Two bins with every value in the first except the maximum.
  auto res = woe_fhe(y, XB, 2, k.ctx, k.keys, 5);
  std::uint64_t pos = 0;
  for (int v : y) pos += v;
  EXPECT_EQ(res.tables[0].good_total, pos);
  EXPECT_EQ(res.tables[0].good[0] + res.tables[0].good[1], pos);
}

TEST(WoeFhe, EmptyCellsAreSmoothed) {
  const auto& k = desk();
  Matrix XB(6, 1);
  XB.data = {0, 0, 0, 1, 1, 1};
  const std::vector<int> y{1, 1, 1, 0, 0, 1};
  auto res = woe_fhe(y, XB, 2, k.ctx, k.keys, 6);
  EXPECT_EQ(res.tables[0].bad[0], 0u);
  EXPECT_NEAR(res.tables[0].woe[0], std::log((3.0 / 4) / (0.5 / 2)), 1e-12);
}

TEST(WoeFhe, AllPositiveLabelsHaveNoWoe) {
  const auto& k = desk();
  auto XB = random_matrix(20, 1, 0, 1, 34);
  std::vector<int> y(20, 1);
  try {
    woe_fhe(y, XB, 3, k.ctx, k.keys, 7);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::empty_input);
  }
}

TEST(WoeFhe, MisalignedRowsAreRejected) {
  const auto& k = desk();
  auto XB = random_matrix(20, 1, 0, 1, 35);
  std::vector<int> y(19, 1);
  try {
    woe_fhe(y, XB, 3, k.ctx, k.keys, 8);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::protocol);
  }
}

TEST(WoeFhe, PassiveSeesOnlyCiphertextReplies) {
  const auto& k = desk();
  auto XB = random_matrix(40, 2, 0, 1, 36);
  auto y = random_labels(40, 0.5, 37);
  auto res = woe_fhe(y, XB, 4, k.ctx, k.keys, 9);
  EXPECT_EQ(tags_received_by(res.transcript, simnet::PartyId::passive(1)),
            (std::set<std::uint16_t>{simnet::tags::PP_GOOD}));
  EXPECT_EQ(tags_received_by(res.transcript, simnet::PartyId::active()),
            (std::set<std::uint16_t>{simnet::tags::PP_PUBLIC_KEY, simnet::tags::PP_BINS}));
}

TEST(Smote, ExtremeLambdasCopyEndpoints) {
  auto X = random_matrix(30, 3, -1, 1, 40);
  SmotePlan p{{{2, 7, 0.0}, {2, 7, 1.0}}};
  auto out = apply_smote_plan(X, p);
  EXPECT_EQ(out.row(0), X.row(2));
  EXPECT_EQ(out.row(1), X.row(7));
}

TEST(Smote, RowsLieOnSegments) {
  auto X = random_matrix(120, 4, -2, 2, 41);
  auto y = random_labels(120, 0.2, 42);
  SmoteConfig c;
  c.amount = 2.0;
  auto plan = make_smote_plan(X, y, c);
  auto out = apply_smote_plan(X, plan);
  std::size_t minority = 0;
  for (int v : y) minority += v;
  EXPECT_EQ(plan.size(), 2 * minority);
  for (std::size_t t = 0; t < plan.size(); ++t) {
    const auto& p = plan.pairs[t];
    EXPECT_EQ(y[p.orig], 1);
    EXPECT_EQ(y[p.neig], 1);
    EXPECT_NE(p.orig, p.neig);
    EXPECT_GT(p.lambda, 0.0);
    EXPECT_LT(p.lambda, 1.0);
    for (std::size_t j = 0; j < 4; ++j)
      EXPECT_NEAR(out(t, j), p.lambda * X(p.neig, j) + (1 - p.lambda) * X(p.orig, j), 1e-12);
  }
  EXPECT_EQ(smote_plain(X, y, c).data, out.data);
}

TEST(Smote, NeighborsAreNearestWithIndexTies) {
  Matrix F(5, 1);
  F.data = {0.0, 1.0, -1.0, 2.0, 5.0};
  std::vector<std::size_t> rows{0, 1, 2, 3, 4};
  auto nn = minority_neighbors(F, rows, 2);
  EXPECT_EQ(nn[0], (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(nn[1], (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(nn[4], (std::vector<std::size_t>{3, 1}));
}

TEST(Smote, TargetRowsAndErrors) {
  auto X = random_matrix(40, 2, 0, 1, 43);
  auto y = random_labels(40, 0.25, 44);
  SmoteConfig c;
  c.target_rows = 97;
  EXPECT_EQ(make_smote_plan(X, y, c).size(), 57u);
  c.k = 40;
  EXPECT_THROW(make_smote_plan(X, y, c), Error);
  EXPECT_THROW(make_smote_plan(X, std::vector<int>(40, 0), SmoteConfig{}), Error);
  // Bankruptcy sizes: 6819 rows padded out to 13731.
  SmoteConfig big;
  big.target_rows = 13731;
  EXPECT_EQ(smote_count(6819, 220, big), 6912u);
}

TEST(SmoteFhe, MatchesPlainUnderSharedPlan) {
  const auto& k = desk();
  auto XA = random_matrix(90, 3, -2, 2, 50);
  auto XB = random_matrix(90, 4, -2, 2, 51);
  auto y = random_labels(90, 0.3, 52);
  SmoteConfig c;
  c.amount = 0.5;
  c.seed = 53;
  auto res = smote_fhe(XA, y, XB, c, k.ctx, k.keys, 10);
  const auto& plan = res.active.plan;
  EXPECT_EQ(plan.pairs.size(), make_smote_plan(XA, y, c).size());
  auto ea = apply_smote_plan(XA, plan), eb = apply_smote_plan(XB, plan);
  ASSERT_EQ(res.active.rows.rows, plan.size());
  for (std::size_t i = 0; i < ea.data.size(); ++i) EXPECT_NEAR(res.active.rows.data[i], ea.data[i], 1e-3);
  for (std::size_t i = 0; i < eb.data.size(); ++i)
    EXPECT_NEAR(res.passive.rows_masked.data[i] - res.active.r_b.data[i], eb.data[i], 1e-3);
  // Masks really hide B's block.
  double far = 0;
  for (std::size_t i = 0; i < eb.data.size(); ++i)
    far = std::max(far, std::abs(res.passive.rows_masked.data[i] - eb.data[i]));
  EXPECT_GT(far, 10.0);
  for (double v : res.active.r_b.data) EXPECT_LT(std::abs(v), 1024.0);
}

TEST(SmoteFhe, SpansSeveralChunks) {
  const auto& k = desk();
  // 16-wide rows give 256 rows per ciphertext.
  auto XA = random_matrix(600, 9, -1, 1, 54);
  auto XB = random_matrix(600, 5, -1, 1, 55);
  auto y = random_labels(600, 0.1, 56);
  SmoteConfig c;
  c.amount = 0.3;
  auto res = smote_fhe(XA, y, XB, c, k.ctx, k.keys, 11);
  auto ea = apply_smote_plan(XA, res.active.plan), eb = apply_smote_plan(XB, res.active.plan);
  for (std::size_t i = 0; i < ea.data.size(); ++i) EXPECT_NEAR(res.active.rows.data[i], ea.data[i], 1e-3);
  for (std::size_t i = 0; i < eb.data.size(); ++i)
    EXPECT_NEAR(res.passive.rows_masked.data[i] - res.active.r_b.data[i], eb.data[i], 1e-3);
}

TEST(SmoteFhe, ConvexCombinationsAndZeroLambda) {
  const auto& k = desk();
  auto XA = random_matrix(50, 2, -3, 3, 57);
  auto XB = random_matrix(50, 2, -3, 3, 58);
  auto y = random_labels(50, 0.4, 59);
  SmoteConfig c;
  c.k = 3;
  auto res = smote_fhe(XA, y, XB, c, k.ctx, k.keys, 12);
  for (std::size_t t = 0; t < res.active.plan.size(); ++t) {
    const auto& p = res.active.plan.pairs[t];
    for (std::size_t j = 0; j < 2; ++j) {
      const double lo = std::min(XA(p.orig, j), XA(p.neig, j)), hi = std::max(XA(p.orig, j), XA(p.neig, j));
      EXPECT_GE(res.active.rows(t, j), lo - 1e-3);
      EXPECT_LE(res.active.rows(t, j), hi + 1e-3);
      const double b = res.passive.rows_masked(t, j) - res.active.r_b(t, j);
      EXPECT_GE(b, std::min(XB(p.orig, j), XB(p.neig, j)) - 1e-3);
      EXPECT_LE(b, std::max(XB(p.orig, j), XB(p.neig, j)) + 1e-3);
    }
  }
  // With lambda forced to zero the plan reproduces the originals.
  SmotePlan zero = res.active.plan;
  for (auto& p : zero.pairs) p.lambda = 0.0;
  auto copy = apply_smote_plan(XA, zero);
  for (std::size_t t = 0; t < zero.size(); ++t) EXPECT_EQ(copy.row(t), XA.row(zero.pairs[t].orig));
}

TEST(SmoteFhe, ActiveNeverReceivesPlainPassiveFeatures) {
  const auto& k = desk();
  auto XA = random_matrix(30, 2, 0, 1, 60);
  auto XB = random_matrix(30, 2, 0, 1, 61);
  auto y = random_labels(30, 0.5, 62);
  auto res = smote_fhe(XA, y, XB, SmoteConfig{}, k.ctx, k.keys, 13);
  EXPECT_EQ(tags_received_by(res.transcript, simnet::PartyId::active()),
            (std::set<std::uint16_t>{simnet::tags::PP_PUBLIC_KEY, simnet::tags::PP_FEATURES, simnet::tags::PP_SYNTH_A}));
  EXPECT_EQ(tags_received_by(res.transcript, simnet::PartyId::passive(1)),
            (std::set<std::uint16_t>{simnet::tags::PP_SYNTH_MASKED}));
}

// The correction restores B's synthetic block inside vertical training.
TEST(SmoteFhe, CorrectionFeedsVerticalTraining) {
  const auto& k = desk();
  auto XA = random_matrix(60, 2, -1, 1, 63);
  auto XB = random_matrix(60, 2, -1, 1, 64);
  auto y = random_labels(60, 0.3, 65);
  SmoteConfig c;
  c.amount = 0.5;
  auto res = smote_fhe(XA, y, XB, c, k.ctx, k.keys, 14);
  const std::size_t m = res.active.plan.size();
  Matrix A2(60 + m, 2), B2(60 + m, 2), B2clean(60 + m, 2);
  std::vector<int> ypm(60 + m, 1);
  auto eb = apply_smote_plan(XB, res.active.plan);
  for (std::size_t i = 0; i < 60 + m; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      A2(i, j) = i < 60 ? XA(i, j) : res.active.rows(i - 60, j);
      B2(i, j) = i < 60 ? XB(i, j) : res.passive.rows_masked(i - 60, j);
      B2clean(i, j) = i < 60 ? XB(i, j) : eb(i - 60, j);
    }
    if (i < 60) ypm[i] = y[i] ? 1 : -1;
  }
  auto corr = smote_correction(60, res.active.r_b);
  logreg::LrConfig lc;
  lc.iterations = 2;
  lc.learning_rate = 0.5;
  auto enc = logreg::vfl_train(A2, ypm, B2, lc, k.ctx, k.keys, 15, &corr);
  auto shadow = logreg::vfl_shadow(A2, ypm, B2clean, lc);
  EXPECT_LT(fedfhe::testing::max_abs_diff(enc.theta, shadow.back()), 1e-2);
}
