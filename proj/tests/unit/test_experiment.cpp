#include <gtest/gtest.h>

#include <filesystem>

#include "fedfhe/common/error.hpp"
#include "fedfhe/experiment/experiment.hpp"

using namespace fedfhe;
using namespace fedfhe::experiment;

namespace {

const std::string kBreast = FEDFHE_TEST_DATA_DIR "/breast_cancer.csv";

ExperimentConfig breast(ModelKind model, SplitMode mode) {
  ExperimentConfig c;
  c.dataset = kBreast;
  c.label = "target";
  c.id_column = "id";
  c.model = model;
  c.mode = mode;
  c.secureboost.num_trees = 2;
  c.lr.iterations = 10;
  c.lr.learning_rate = 0.3;
  return c;
}

ErrorCode code_of(const ExperimentConfig& c) {
  try {
    run_experiment(c);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io;
}

}  // namespace

TEST(Config, JsonRoundTripAndDefaults) {
  auto c = breast(ModelKind::lr, SplitMode::horizontal);
  c.a_features = {"x"};
  c.b_features = {"y"};
  c.smote_config.target_rows = 13731;
  c.lr.iterations = 7;
  auto d = config_from_json(to_json(c));
  EXPECT_EQ(to_json(d), to_json(c));
  EXPECT_EQ(config_digest(d), config_digest(c));

  auto partial = config_from_json({{"dataset", "x.csv"}, {"lr", {{"iterations", 3}}}});
  EXPECT_EQ(partial.lr.iterations, 3);
  EXPECT_DOUBLE_EQ(partial.lr.learning_rate, ExperimentConfig{}.lr.learning_rate);
  c.out_dir = "elsewhere";
  EXPECT_EQ(config_digest(d), config_digest(c));
  c.seed = 9;
  EXPECT_NE(config_digest(d), config_digest(c));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(config_from_json({{"datset", "x"}}), Error);
  EXPECT_THROW(config_from_json({{"secureboost", {{"depth", 3}}}}), Error);
  EXPECT_THROW(config_from_json({{"model", "svm"}}), Error);
  EXPECT_THROW(config_from_json({{"repeats", "many"}}), Error);
}

TEST(Config, ValidationErrors) {
  EXPECT_EQ(code_of(breast(ModelKind::secureboost, SplitMode::horizontal)), ErrorCode::invalid_argument);
  auto c = breast(ModelKind::lr, SplitMode::vertical);
  c.a_features = {"mean_radius"};
  c.b_features = {"mean_radius"};
  EXPECT_EQ(code_of(c), ErrorCode::invalid_argument);
  c.b_features = {"mean_texture"};  // does not cover the other columns
  EXPECT_EQ(code_of(c), ErrorCode::invalid_argument);
  auto s = breast(ModelKind::secureboost, SplitMode::vertical);
  s.smote = true;
  EXPECT_EQ(code_of(s), ErrorCode::invalid_argument);
  auto missing = breast(ModelKind::lr, SplitMode::horizontal);
  missing.label = "diagnosis";
  try {
    run_experiment(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
    EXPECT_NE(std::string(e.what()).find("load"), std::string::npos);
  }
}

TEST(Experiment, SecureBoostVerticalIsAccurateAndDeterministic) {
  auto c = breast(ModelKind::secureboost, SplitMode::vertical);
  c.psi_pad = 700;
  auto r1 = run_experiment(c);
  auto r2 = run_experiment(c);
  ASSERT_EQ(r1.report.repeats.size(), 1u);
  EXPECT_EQ(r1.report.aligned_rows, 569u);
  EXPECT_EQ(r1.report.repeats[0].test_rows, 113u);
  EXPECT_GE(r1.report.accuracy_mean(), 0.9);
  EXPECT_EQ(timeless(to_json(r1.report)), timeless(to_json(r2.report)));
  EXPECT_EQ(r1.transcript.digest(), r2.transcript.digest());
  const auto& ph = r1.report.repeats[0].phases;
  for (const char* p : {"psi", "train", "evaluate"}) {
    ASSERT_TRUE(ph.count(p)) << p;
    EXPECT_GT(ph.at(p).bytes, 0u) << p;
  }
}

TEST(Experiment, HorizontalLrWithFourClients) {
  auto c = breast(ModelKind::lr, SplitMode::horizontal);
  c.clients = 4;
  auto r = run_experiment(c);
  EXPECT_GE(r.report.accuracy_mean(), 0.9);
  EXPECT_EQ(r.report.repeats[0].train_rows, 456u);
  EXPECT_EQ(r.models.lr.beta.size(), 31u);
}

TEST(Experiment, VerticalLrWithWoeAndSmote) {
  auto c = breast(ModelKind::lr, SplitMode::vertical);
  c.woe = true;
  c.smote = true;
  c.smote_config.minority_label = 0;
  c.smote_config.amount = 0.5;
  auto r = run_experiment(c);
  const auto& m = r.report.repeats[0];
  // 170 training rows of class 0, half as many synthesized
  EXPECT_EQ(m.train_rows, 456u + 85u);
  EXPECT_GE(m.accuracy, 0.85);
  for (const char* p : {"psi", "woe", "smote", "train", "evaluate"}) EXPECT_TRUE(m.phases.count(p)) << p;
  EXPECT_EQ(r.models.woe_a.size(), 15u);
  EXPECT_EQ(r.models.woe_b.size(), 15u);
}

TEST(Experiment, OutputsRoundTrip) {
  auto c = breast(ModelKind::secureboost, SplitMode::vertical);
  c.passives = 2;
  auto r = run_experiment(c);
  auto dir = (std::filesystem::temp_directory_path() / "fedfhe_exp_out").string();
  std::filesystem::remove_all(dir);
  write_outputs(dir, r);
  for (const char* f : {"report.json", "metrics.csv", "transcript.jsonl", "model.json", "lookup_active.json",
                        "lookup_passive1.json", "lookup_passive2.json", "parties.json"})
    EXPECT_TRUE(std::filesystem::exists(std::filesystem::path(dir) / f)) << f;
  auto m = load_models(dir, ModelKind::secureboost);
  EXPECT_EQ(m.passive_features, r.models.passive_features);
  EXPECT_EQ(m.passive_tables.size(), 2u);
  EXPECT_EQ(m.a_scaler.mean, r.models.a_scaler.mean);
  EXPECT_EQ(secureboost::to_json(m.trees), secureboost::to_json(r.models.trees));
  std::filesystem::remove_all(dir);
}

TEST(Preprocess, AlignsPadsAndAppendsSyntheticRows) {
  auto c = breast(ModelKind::lr, SplitMode::vertical);
  c.psi_pad = 600;
  c.smote = true;
  c.smote_config.minority_label = 0;
  c.smote_config.target_rows = 700;
  auto p = run_preprocess(c);
  EXPECT_EQ(p.aligned_rows, 569u);
  EXPECT_EQ(p.a.rows, 700u);
  EXPECT_EQ(p.b.rows, 700u);
  EXPECT_EQ(p.y.size(), 700u);
  EXPECT_EQ(std::count(p.provenance.begin(), p.provenance.end(), "synthetic"), 131);
  for (std::size_t i = 569; i < 700; ++i) EXPECT_EQ(p.y[i], 0);
  // Unmasked synthetic B values interpolate between original rows.
  ASSERT_EQ(p.b_correction.rows, 700u);
  for (std::size_t j = 0; j < p.b.cols; ++j) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < 569; ++i) {
      EXPECT_EQ(p.b_correction(i, j), 0.0);
      lo = std::min(lo, p.b(i, j));
      hi = std::max(hi, p.b(i, j));
    }
    for (std::size_t i = 569; i < 700; ++i) {
      const double v = p.b(i, j) + p.b_correction(i, j);
      EXPECT_GE(v, lo - 1e-6);
      EXPECT_LE(v, hi + 1e-6);
    }
  }
  EXPECT_TRUE(p.phases.count("smote"));
}

TEST(BenchInference, ClassicAndPsiAgree) {
  auto c = breast(ModelKind::secureboost, SplitMode::vertical);
  auto rows = bench_inference(c, {1, 2}, {2});
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.predictions_agree);
    EXPECT_EQ(r.samples, 113u);
    EXPECT_EQ(r.psi_sessions, r.samples);  // one passive party
    EXPECT_EQ(r.classic_rounds, r.passive_path_nodes);
    EXPECT_GT(r.classic_bytes, 0u);
    EXPECT_GT(r.psi_bytes, 0u);
  }
}

TEST(Config, RejectsUnknownLrKeys) {
  EXPECT_THROW(config_from_json({{"lr", {{"learning_rte", 0.1}}}}), Error);
}
