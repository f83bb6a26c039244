#pragma once

#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "fedfhe/ckks/params.hpp"
#include "fedfhe/logreg/gradient.hpp"
#include "fedfhe/logreg/model.hpp"
#include "fedfhe/preprocess/smote.hpp"
#include "fedfhe/preprocess/woe.hpp"
#include "fedfhe/secureboost/model.hpp"
#include "fedfhe/secureboost/xgboost.hpp"
#include "fedfhe/simnet/transcript.hpp"

namespace fedfhe::experiment {

enum class ModelKind { secureboost, lr };
enum class SplitMode { horizontal, vertical };

std::string to_string(ModelKind m);
std::string to_string(SplitMode m);
ModelKind model_from_string(const std::string& s);
SplitMode mode_from_string(const std::string& s);

struct ExperimentConfig {
  std::string dataset;
  std::string label = "target";
  std::string id_column;  // empty: row numbers
  std::string positive = "1";

  ModelKind model = ModelKind::secureboost;
  SplitMode mode = SplitMode::vertical;

  // horizontal: number of clients sharing the training rows
  std::size_t clients = 4;
  // vertical: A owns the label. Both empty splits the columns in half.
  std::vector<std::string> a_features;
  std::vector<std::string> b_features;
  // secureboost: B's columns are dealt into this many passive parties
  std::size_t passives = 1;
  // Each side pads its id list with private dummies up to this size.
  std::size_t psi_pad = 0;

  secureboost::SplitConfig secureboost;
  logreg::LrConfig lr;

  bool woe = false;
  std::size_t woe_bins = 10;
  bool smote = false;
  preprocess::SmoteConfig smote_config;

  ckks::SecurityProfile profile = ckks::SecurityProfile::desk;
  std::uint64_t seed = 1;
  int repeats = 1;
  double test_fraction = 0.2;
  std::string out_dir;

  // Checks the vertical lists are disjoint and cover the dataset's columns
  // once the dataset header is known.
  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
std::string config_digest(const ExperimentConfig& c);

struct PhaseStats {
  double time_s = 0.0;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
  std::uint64_t rounds = 0;
};

struct RepeatMetrics {
  int repeat = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::size_t train_rows = 0;  // after SMOTE
  std::size_t test_rows = 0;
  double train_time_s = 0.0;
  std::map<std::string, PhaseStats> phases;
};

struct MetricsReport {
  ExperimentConfig config;
  std::string digest;
  std::size_t dataset_rows = 0;
  std::size_t aligned_rows = 0;
  std::vector<RepeatMetrics> repeats;

  double accuracy_mean() const;
  double accuracy_std() const;  // population std
  double train_time_mean() const;
};

// Wall-clock fields are grouped under "time_s" keys so callers can drop them.
nlohmann::json to_json(const MetricsReport& r);
// The report without any timing field, for determinism checks.
nlohmann::json timeless(const nlohmann::json& report);

struct ScalerState {
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Models of the last repeat, with what each party needs to encode new rows:
// WOE tables (when enabled) are applied before the scaler.
struct TrainedModels {
  std::vector<std::string> a_features;
  std::vector<std::vector<std::string>> passive_features;
  ScalerState a_scaler;
  std::vector<ScalerState> passive_scalers;
  std::vector<preprocess::WoeTable> woe_a;
  std::vector<preprocess::WoeTable> woe_b;
  secureboost::FedTreeModel trees;
  secureboost::LookupTable active_table;
  std::vector<secureboost::LookupTable> passive_tables;
  logreg::LrModel lr;
};

struct ExperimentResult {
  MetricsReport report;
  TrainedModels models;
  simnet::Transcript transcript;  // every protocol run of every repeat, in order
};

ExperimentResult run_experiment(const ExperimentConfig& config);

// report.json, metrics.csv, transcript.jsonl, model.json, lookup_*.json and
// parties.json into `dir`.
void write_outputs(const std::string& dir, const ExperimentResult& result);

nlohmann::json to_json(const TrainedModels& m);
// Reads parties.json plus the model files next to it.
TrainedModels load_models(const std::string& dir, ModelKind kind);

// Vertical preprocessing over the whole aligned dataset: WOE (A plain, B
// encrypted), per-party standardization, then encrypted SMOTE when enabled.
struct PreprocessResult {
  std::vector<std::string> a_features;
  std::vector<std::string> b_features;
  Matrix a;                 // A's rows, synthetic rows appended
  Matrix b;                 // B's rows; synthetic rows still carry R_B
  Matrix b_correction;      // held by A: zero rows, then -R_B; empty without SMOTE
  std::vector<int> y;       // {0,1}
  std::vector<std::string> ids;
  std::vector<std::string> provenance;  // "original" or "synthetic"
  std::vector<preprocess::WoeTable> woe_a;
  std::vector<preprocess::WoeTable> woe_b;
  std::size_t aligned_rows = 0;
  std::map<std::string, PhaseStats> phases;
  simnet::Transcript transcript;
};

PreprocessResult run_preprocess(const ExperimentConfig& config);

// Classic against PSI inference on held-out rows for a grid of ensembles.
struct InferenceBenchRow {
  int trees = 0;
  int depth = 0;
  std::size_t samples = 0;
  std::uint64_t classic_bytes = 0;
  std::uint64_t psi_bytes = 0;
  std::uint64_t classic_rounds = 0;
  std::uint64_t psi_sessions = 0;
  // Passive-owned nodes summed over each sample's realized paths.
  std::uint64_t passive_path_nodes = 0;
  bool predictions_agree = true;
  // Samples whose classic rounds differ from their passive path nodes, and
  // samples without exactly one PSI session per passive party.
  std::size_t round_mismatches = 0;
  std::size_t session_mismatches = 0;

  double reduction() const;  // 1 - psi / classic
};

std::vector<InferenceBenchRow> bench_inference(const ExperimentConfig& config, const std::vector<int>& trees,
                                               const std::vector<int>& depths);
nlohmann::json to_json(const InferenceBenchRow& r);

}  // namespace fedfhe::experiment
