#include "fedfhe/experiment/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "fedfhe/ckks/ckks.hpp"
#include "fedfhe/common/error.hpp"
#include "fedfhe/common/hash.hpp"
#include "fedfhe/common/json_io.hpp"
#include "fedfhe/common/prng.hpp"
#include "fedfhe/data/dataset.hpp"
#include "fedfhe/logreg/federated.hpp"
#include "fedfhe/logreg/sigmoid.hpp"
#include "fedfhe/psi/psi.hpp"
#include "fedfhe/secureboost/inference.hpp"
#include "fedfhe/secureboost/train.hpp"

namespace fedfhe::experiment {

using nlohmann::json;

std::string to_string(ModelKind m) { return m == ModelKind::secureboost ? "secureboost" : "lr"; }
std::string to_string(SplitMode m) { return m == SplitMode::horizontal ? "horizontal" : "vertical"; }

ModelKind model_from_string(const std::string& s) {
  if (s == "secureboost") return ModelKind::secureboost;
  if (s == "lr") return ModelKind::lr;
  throw Error(ErrorCode::invalid_argument, "unknown model '" + s + "'");
}

SplitMode mode_from_string(const std::string& s) {
  if (s == "horizontal") return SplitMode::horizontal;
  if (s == "vertical") return SplitMode::vertical;
  throw Error(ErrorCode::invalid_argument, "unknown mode '" + s + "'");
}

void ExperimentConfig::validate() const {
  require(!dataset.empty(), ErrorCode::invalid_argument, "no dataset given");
  require(!label.empty(), ErrorCode::invalid_argument, "no label column given");
  require(repeats >= 1, ErrorCode::invalid_argument, "repeats must be at least 1");
  require(test_fraction > 0 && test_fraction < 1, ErrorCode::invalid_argument, "test_fraction must be in (0,1)");
  if (mode == SplitMode::horizontal) {
    require(model == ModelKind::lr, ErrorCode::invalid_argument, "secureboost needs the vertical split");
    require(clients >= 1, ErrorCode::invalid_argument, "at least one client needed");
    require(!woe, ErrorCode::invalid_argument, "woe needs the vertical split");
  } else {
    require(passives >= 1, ErrorCode::invalid_argument, "at least one passive party needed");
    require(model == ModelKind::secureboost || passives == 1, ErrorCode::invalid_argument,
            "vertical lr has exactly one passive party");
    std::set<std::string> seen;
    for (const auto* list : {&a_features, &b_features})
      for (const auto& f : *list) require(seen.insert(f).second, ErrorCode::invalid_argument, "feature '" + f + "' listed twice");
    require(seen.count(label) == 0, ErrorCode::invalid_argument, "label listed as a feature");
    require(a_features.empty() == b_features.empty(), ErrorCode::invalid_argument,
            "give both a_features and b_features or neither");
  }
  require(!smote || model == ModelKind::lr, ErrorCode::invalid_argument, "smote is supported for lr only");
  require(woe_bins >= 2, ErrorCode::invalid_argument, "woe_bins must be at least 2");
  secureboost.validate();
  lr.validate();
  smote_config.validate();
}

json to_json(const ExperimentConfig& c) {
  const auto& s = c.secureboost;
  const auto& m = c.smote_config;
  return {{"dataset", c.dataset},
          {"label", c.label},
          {"id_column", c.id_column},
          {"positive", c.positive},
          {"model", to_string(c.model)},
          {"mode", to_string(c.mode)},
          {"clients", c.clients},
          {"a_features", c.a_features},
          {"b_features", c.b_features},
          {"passives", c.passives},
          {"psi_pad", c.psi_pad},
          {"secureboost",
           {{"lambda", s.lambda},
            {"gamma", s.gamma},
            {"epsilon", s.epsilon},
            {"max_depth", s.max_depth},
            {"num_trees", s.num_trees},
            {"learning_rate", s.learning_rate},
            {"min_samples_leaf", s.min_samples_leaf}}},
          {"lr", logreg::to_json(c.lr)},
          {"woe", c.woe},
          {"woe_bins", c.woe_bins},
          {"smote", c.smote},
          {"smote_config",
           {{"k", m.k},
            {"amount", m.amount},
            {"target_rows", m.target_rows},
            {"minority_label", m.minority_label},
            {"seed", m.seed},
            {"mask_bound", m.mask_bound}}},
          {"profile", ckks::to_string(c.profile)},
          {"seed", c.seed},
          {"repeats", c.repeats},
          {"test_fraction", c.test_fraction},
          {"out_dir", c.out_dir}};
}

namespace {

template <class T>
void take(const json& j, const char* key, T& out, std::set<std::string>& used) {
  if (j.contains(key)) {
    out = j.at(key).get<T>();
    used.insert(key);
  }
}

void reject_unknown(const json& j, const std::set<std::string>& used, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    require(used.count(it.key()) > 0, ErrorCode::invalid_argument, "unknown config key '" + where + it.key() + "'");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  require(j.is_object(), ErrorCode::decode_failure, "config must be an object");
  ExperimentConfig c;
  std::set<std::string> used;
  try {
    take(j, "dataset", c.dataset, used);
    take(j, "label", c.label, used);
    take(j, "id_column", c.id_column, used);
    take(j, "positive", c.positive, used);
    if (j.contains("model")) c.model = model_from_string(j.at("model").get<std::string>()), used.insert("model");
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>()), used.insert("mode");
    take(j, "clients", c.clients, used);
    take(j, "a_features", c.a_features, used);
    take(j, "b_features", c.b_features, used);
    take(j, "passives", c.passives, used);
    take(j, "psi_pad", c.psi_pad, used);
    if (j.contains("secureboost")) {
      const auto& s = j.at("secureboost");
      std::set<std::string> u;
      take(s, "lambda", c.secureboost.lambda, u);
      take(s, "gamma", c.secureboost.gamma, u);
      take(s, "epsilon", c.secureboost.epsilon, u);
      take(s, "max_depth", c.secureboost.max_depth, u);
      take(s, "num_trees", c.secureboost.num_trees, u);
      take(s, "learning_rate", c.secureboost.learning_rate, u);
      take(s, "min_samples_leaf", c.secureboost.min_samples_leaf, u);
      reject_unknown(s, u, "secureboost.");
      used.insert("secureboost");
    }
    if (j.contains("lr")) {
      const auto defaults = logreg::to_json(c.lr);
      std::set<std::string> u;
      for (auto it = defaults.begin(); it != defaults.end(); ++it) u.insert(it.key());
      reject_unknown(j.at("lr"), u, "lr.");
      json merged = defaults;
      merged.update(j.at("lr"));
      c.lr = logreg::lr_config_from_json(merged);
      used.insert("lr");
    }
    take(j, "woe", c.woe, used);
    take(j, "woe_bins", c.woe_bins, used);
    take(j, "smote", c.smote, used);
    if (j.contains("smote_config")) {
      const auto& s = j.at("smote_config");
      std::set<std::string> u;
      take(s, "k", c.smote_config.k, u);
      take(s, "amount", c.smote_config.amount, u);
      take(s, "target_rows", c.smote_config.target_rows, u);
      take(s, "minority_label", c.smote_config.minority_label, u);
      take(s, "seed", c.smote_config.seed, u);
      take(s, "mask_bound", c.smote_config.mask_bound, u);
      reject_unknown(s, u, "smote_config.");
      used.insert("smote_config");
    }
    if (j.contains("profile")) c.profile = ckks::profile_from_string(j.at("profile").get<std::string>()), used.insert("profile");
    take(j, "seed", c.seed, used);
    take(j, "repeats", c.repeats, used);
    take(j, "test_fraction", c.test_fraction, used);
    take(j, "out_dir", c.out_dir, used);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::decode_failure, std::string("config: ") + e.what());
  }
  reject_unknown(j, used, "");
  return c;
}

std::string config_digest(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("out_dir");
  return to_hex(sha256(j.dump()));
}

double MetricsReport::accuracy_mean() const {
  if (repeats.empty()) return 0.0;
  double s = 0;
  for (const auto& r : repeats) s += r.accuracy;
  return s / static_cast<double>(repeats.size());
}

double MetricsReport::accuracy_std() const {
  if (repeats.empty()) return 0.0;
  const double m = accuracy_mean();
  double v = 0;
  for (const auto& r : repeats) v += (r.accuracy - m) * (r.accuracy - m);
  return std::sqrt(v / static_cast<double>(repeats.size()));
}

double MetricsReport::train_time_mean() const {
  if (repeats.empty()) return 0.0;
  double s = 0;
  for (const auto& r : repeats) s += r.train_time_s;
  return s / static_cast<double>(repeats.size());
}

json to_json(const MetricsReport& r) {
  json reps = json::array();
  PhaseStats total;
  for (const auto& m : r.repeats) {
    json phases = json::object();
    for (const auto& [name, p] : m.phases) {
      phases[name] = {{"time_s", p.time_s}, {"messages", p.messages}, {"bytes", p.bytes}, {"rounds", p.rounds}};
      total.messages += p.messages;
      total.bytes += p.bytes;
      total.rounds += p.rounds;
    }
    reps.push_back({{"repeat", m.repeat},
                    {"seed", m.seed},
                    {"accuracy", m.accuracy},
                    {"train_rows", m.train_rows},
                    {"test_rows", m.test_rows},
                    {"train_time_s", m.train_time_s},
                    {"phases", phases}});
  }
  double lo = 1, hi = 0;
  for (const auto& m : r.repeats) lo = std::min(lo, m.accuracy), hi = std::max(hi, m.accuracy);
  return {{"format", "fedfhe.report"},
          {"version", 1},
          {"config", to_json(r.config)},
          {"config_digest", r.digest},
          {"dataset_rows", r.dataset_rows},
          {"aligned_rows", r.aligned_rows},
          {"accuracy", {{"mean", r.accuracy_mean()}, {"std", r.accuracy_std()}, {"min", lo}, {"max", hi}}},
          {"train_time_s", r.train_time_mean()},
          {"transcript", {{"messages", total.messages}, {"bytes", total.bytes}, {"rounds", total.rounds}}},
          {"repeats", reps}};
}

json timeless(const json& report) {
  if (report.is_object()) {
    json out = json::object();
    for (auto it = report.begin(); it != report.end(); ++it) {
      const auto& k = it.key();
      if (k == "time_s" || k == "train_time_s") continue;
      out[k] = timeless(it.value());
    }
    return out;
  }
  if (report.is_array()) {
    json out = json::array();
    for (const auto& v : report) out.push_back(timeless(v));
    return out;
  }
  return report;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

PhaseStats stats_of(const simnet::Transcript& t, double time_s) {
  const auto a = simnet::account(t);
  return {time_s, a.messages, a.bytes, a.rounds};
}

// Module errors keep their code and gain the phase name.
template <class F>
auto in_phase(const char* phase, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(phase) + ": " + e.what());
  }
}

std::vector<std::string> padded_ids(const std::vector<std::string>& ids, std::size_t pad, const std::string& tag) {
  std::vector<std::string> out = ids;
  for (std::size_t i = 0; out.size() < pad; ++i) out.push_back("~" + tag + "-pad-" + std::to_string(i));
  return out;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  require(a.cols == b.cols || a.rows == 0 || b.rows == 0, ErrorCode::invalid_argument, "column mismatch");
  Matrix out(a.rows + b.rows, std::max(a.cols, b.cols));
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

template <class T>
std::vector<T> concat(std::vector<T> a, const std::vector<T>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

data::Dataset load(const ExperimentConfig& cfg) {
  return in_phase("load", [&] { return data::load_csv(cfg.dataset, {cfg.label, cfg.id_column, cfg.positive, {}}); });
}

ScalerState state_of(const data::Scaler& s) { return {s.mean, s.stddev}; }

// Vertical view of one dataset: A keeps the label, passive k holds pf[k].
struct Vertical {
  std::vector<std::string> a_feat;
  std::vector<std::vector<std::string>> pf;
  data::Dataset a;
  std::vector<data::Dataset> b;
};

Vertical make_vertical(const ExperimentConfig& cfg, const data::Dataset& full, std::uint64_t seed) {
  Vertical v;
  v.a_feat = cfg.a_features;
  auto b_feat = cfg.b_features;
  if (v.a_feat.empty()) {
    const auto half = static_cast<std::ptrdiff_t>(full.features.size() / 2);
    v.a_feat.assign(full.features.begin(), full.features.begin() + half);
    b_feat.assign(full.features.begin() + half, full.features.end());
  }
  require(v.a_feat.size() + b_feat.size() == full.features.size(), ErrorCode::invalid_argument,
          "a_features and b_features must cover every feature column");
  require(!b_feat.empty() && b_feat.size() >= cfg.passives, ErrorCode::invalid_argument, "too few passive features");
  require(cfg.model == ModelKind::secureboost || !v.a_feat.empty(), ErrorCode::invalid_argument,
          "vertical lr needs features at A");
  v.pf.resize(cfg.passives);
  for (std::size_t j = 0; j < b_feat.size(); ++j) v.pf[j * cfg.passives / b_feat.size()].push_back(b_feat[j]);

  v.a = data::select_features(full, v.a_feat);
  // The passive copies arrive in their own row order.
  std::vector<std::size_t> perm(full.rows());
  std::iota(perm.begin(), perm.end(), 0);
  Prng(seed, 0x7065726d).shuffle(perm.begin(), perm.end());
  const auto shuffled = data::select_rows(full, perm);
  for (const auto& f : v.pf) {
    auto d = data::select_features(shuffled, f);
    d.label.clear();
    d.y.clear();
    v.b.push_back(std::move(d));
  }
  return v;
}

// A intersects its ids with every passive party in turn; all rows end up in
// the common canonical order.
simnet::Transcript align(Vertical& v, std::size_t pad, std::uint64_t seed) {
  simnet::Transcript t;
  std::vector<std::string> common = v.a.ids;
  for (std::size_t k = 0; k < v.b.size(); ++k) {
    auto al = in_phase("psi", [&] {
      return psi::align_samples(padded_ids(common, pad, "a"), padded_ids(v.b[k].ids, pad, "b"), seed * 977 + k);
    });
    common = al.ids_a;
    t.append(al.transcript);
  }
  v.a = data::align_to(v.a, common);
  for (auto& b : v.b) b = data::align_to(b, common);
  return t;
}

struct WoeFit {
  std::vector<preprocess::WoeTable> a;
  std::vector<std::vector<preprocess::WoeTable>> b;
  simnet::Transcript transcript;
};

// A bins its own columns in the clear; every passive party runs the encrypted protocol.
WoeFit fit_woe(const ExperimentConfig& cfg, const Matrix& XA, std::span<const int> y, const std::vector<Matrix>& XB,
               const ckks::ContextPtr& ctx, const ckks::KeySet& keys, std::uint64_t seed) {
  return in_phase("woe", [&] {
    WoeFit w;
    if (XA.cols > 0) {
      const auto specs = preprocess::equal_width_bins(XA, cfg.woe_bins);
      for (std::size_t j = 0; j < specs.size(); ++j) {
        const auto col = preprocess::column(XA, j);
        w.a.push_back(preprocess::woe_plain(specs[j], preprocess::one_hot(col, specs[j]), y));
      }
    }
    for (std::size_t k = 0; k < XB.size(); ++k) {
      auto r = preprocess::woe_fhe(y, XB[k], cfg.woe_bins, ctx, keys, seed * 389 + k);
      w.b.push_back(std::move(r.tables));
      w.transcript.append(r.transcript);
    }
    return w;
  });
}

Matrix encode(const Matrix& X, const std::vector<preprocess::WoeTable>& t) {
  return t.empty() ? X : preprocess::woe_encode(X, t);
}

std::uint64_t passive_nodes_on_path(const secureboost::FedTree& tree, int leaf) {
  std::uint64_t n = 0;
  for (int id = leaf; id != 0;) {
    id = (id - 1) / 2;
    if (tree.node(id).owner.role == simnet::Role::passive) ++n;
  }
  return n;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  auto& report = result.report;
  report.config = cfg;
  report.digest = config_digest(cfg);

  const auto full = load(cfg);
  report.dataset_rows = full.rows();

  auto ctx = ckks::Context::create(ckks::FheParams::for_profile(cfg.profile));
  const auto keys = ckks::keygen(ctx, cfg.seed);
  auto& models = result.models;

  for (int rep = 0; rep < cfg.repeats; ++rep) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
    RepeatMetrics m;
    m.repeat = rep;
    m.seed = seed;
    auto record = [&](const std::string& phase, const simnet::Transcript& t, double time_s) {
      m.phases[phase] = stats_of(t, time_s);
      result.transcript.append(t);
    };
    auto lr_cfg = cfg.lr;
    lr_cfg.seed = cfg.lr.seed + seed;

    if (cfg.mode == SplitMode::horizontal) {
      const auto split = in_phase("split", [&] { return data::stratified_split(full.y, cfg.test_fraction, seed); });
      auto train = data::select_rows(full, split.train);
      auto test = data::select_rows(full, split.test);
      const auto scaler = data::Scaler::fit(train.X);
      train.X = scaler.apply(train.X);
      test.X = scaler.apply(test.X);

      // Training rows are dealt round-robin after a seeded shuffle.
      std::vector<std::size_t> order(train.rows());
      std::iota(order.begin(), order.end(), 0);
      Prng(seed, 0x636c69656e7473).shuffle(order.begin(), order.end());
      std::vector<std::vector<std::size_t>> rows(cfg.clients);
      for (std::size_t i = 0; i < order.size(); ++i) rows[i % cfg.clients].push_back(order[i]);
      std::vector<logreg::ClientShard> shards(cfg.clients);
      auto t0 = Clock::now();
      for (std::size_t k = 0; k < cfg.clients; ++k) {
        std::sort(rows[k].begin(), rows[k].end());
        auto part = data::select_rows(train, rows[k]);
        if (cfg.smote) {
          auto sc = cfg.smote_config;
          sc.seed = cfg.smote_config.seed + seed * 131 + k;
          const auto syn = in_phase("smote", [&] { return preprocess::smote_plain(part.X, part.y, sc); });
          part.X = vstack(part.X, syn);
          part.y.insert(part.y.end(), syn.rows, sc.minority_label);
        }
        shards[k] = {part.X, data::to_pm(part.y)};
        m.train_rows += part.rows();
      }
      if (cfg.smote) m.phases["smote"] = {seconds_since(t0), 0, 0, 0};

      t0 = Clock::now();
      auto fed = in_phase("train", [&] { return logreg::hfl_train(shards, lr_cfg, ctx, keys, seed); });
      m.train_time_s = seconds_since(t0);
      record("train", fed.transcript, m.train_time_s);

      t0 = Clock::now();
      m.accuracy = logreg::hfl_evaluate(fed.theta, {test.X, data::to_pm(test.y)});
      m.phases["evaluate"] = {seconds_since(t0), 0, 0, 0};
      m.test_rows = test.rows();
      report.aligned_rows = full.rows();

      models = {};
      models.a_features = full.features;
      models.a_scaler = state_of(scaler);
      models.lr = {full.features, fed.theta, scaler.mean, scaler.stddev,
                   logreg::fit_sigmoid_poly(lr_cfg.sigmoid_degree, lr_cfg.sigmoid_lo, lr_cfg.sigmoid_hi), lr_cfg};
      report.repeats.push_back(std::move(m));
      continue;
    }

    auto v = make_vertical(cfg, full, seed);
    auto t0 = Clock::now();
    const auto psi_t = align(v, cfg.psi_pad, seed);
    record("psi", psi_t, seconds_since(t0));
    report.aligned_rows = v.a.rows();

    const auto split = in_phase("split", [&] { return data::stratified_split(v.a.y, cfg.test_fraction, seed); });
    auto a_tr = data::select_rows(v.a, split.train), a_te = data::select_rows(v.a, split.test);
    std::vector<Matrix> b_tr, b_te;
    for (const auto& b : v.b) {
      b_tr.push_back(data::select_rows(b, split.train).X);
      b_te.push_back(data::select_rows(b, split.test).X);
    }

    models = {};
    models.a_features = v.a_feat;
    models.passive_features = v.pf;
    if (cfg.woe) {
      t0 = Clock::now();
      auto w = fit_woe(cfg, a_tr.X, a_tr.y, b_tr, ctx, keys, seed);
      a_tr.X = encode(a_tr.X, w.a);
      a_te.X = encode(a_te.X, w.a);
      for (std::size_t k = 0; k < b_tr.size(); ++k) {
        b_tr[k] = encode(b_tr[k], w.b[k]);
        b_te[k] = encode(b_te[k], w.b[k]);
        models.woe_b = concat(models.woe_b, w.b[k]);
      }
      models.woe_a = w.a;
      record("woe", w.transcript, seconds_since(t0));
    }

    data::Scaler sa;
    if (!v.a_feat.empty()) {
      sa = data::Scaler::fit(a_tr.X);
      a_tr.X = sa.apply(a_tr.X);
      a_te.X = sa.apply(a_te.X);
      models.a_scaler = state_of(sa);
    }
    std::vector<data::Scaler> sb;
    for (std::size_t k = 0; k < b_tr.size(); ++k) {
      sb.push_back(data::Scaler::fit(b_tr[k]));
      b_tr[k] = sb[k].apply(b_tr[k]);
      b_te[k] = sb[k].apply(b_te[k]);
      models.passive_scalers.push_back(state_of(sb[k]));
    }
    m.test_rows = a_te.rows();

    if (cfg.model == ModelKind::secureboost) {
      t0 = Clock::now();
      const secureboost::ActiveKeys ak{ctx, keys};
      auto tr = in_phase("train", [&] {
        return secureboost::train_ensemble(a_tr.X, a_tr.y, b_tr, cfg.secureboost, ak, seed);
      });
      m.train_time_s = seconds_since(t0);
      record("train", tr.transcript, m.train_time_s);
      m.train_rows = a_tr.rows();

      t0 = Clock::now();
      std::vector<secureboost::InferenceShard> ps;
      for (std::size_t k = 0; k < b_te.size(); ++k) ps.push_back({&tr.passive_tables[k], &b_te[k]});
      const auto inf = in_phase("evaluate", [&] {
        return secureboost::classic_infer(tr.model, {&tr.active_table, &a_te.X}, ps, seed);
      });
      std::size_t ok = 0;
      for (std::size_t i = 0; i < a_te.rows(); ++i) ok += (inf.margins[i] > 0) == (a_te.y[i] == 1);
      m.accuracy = static_cast<double>(ok) / static_cast<double>(a_te.rows());
      record("evaluate", inf.transcript, seconds_since(t0));

      models.trees = tr.model;
      models.active_table = tr.active_table;
      models.passive_tables = tr.passive_tables;
    } else {
      Matrix XA = a_tr.X, XB = b_tr[0];
      std::vector<int> y = a_tr.y;
      Matrix correction;
      if (cfg.smote) {
        t0 = Clock::now();
        auto sc = cfg.smote_config;
        sc.seed = cfg.smote_config.seed + seed * 131;
        const auto sm = in_phase("smote", [&] { return preprocess::smote_fhe(XA, y, XB, sc, ctx, keys, seed * 613); });
        correction = preprocess::smote_correction(XA.rows, sm.active.r_b);
        XA = vstack(XA, sm.active.rows);
        XB = vstack(XB, sm.passive.rows_masked);
        y.insert(y.end(), sm.active.rows.rows, sc.minority_label);
        record("smote", sm.transcript, seconds_since(t0));
      }
      m.train_rows = XA.rows;
      const auto y_pm = data::to_pm(y);
      t0 = Clock::now();
      auto fed = in_phase("train", [&] {
        return logreg::vfl_train(XA, y_pm, XB, lr_cfg, ctx, keys, seed, cfg.smote ? &correction : nullptr);
      });
      m.train_time_s = seconds_since(t0);
      record("train", fed.transcript, m.train_time_s);

      t0 = Clock::now();
      const auto ev = in_phase("evaluate", [&] {
        return logreg::vfl_evaluate(a_te.X, data::to_pm(a_te.y), b_te[0], fed.theta, ctx, keys, seed);
      });
      m.accuracy = ev.accuracy;
      record("evaluate", ev.transcript, seconds_since(t0));

      models.lr = {concat(v.a_feat, v.pf[0]), fed.theta, concat(sa.mean, sb[0].mean), concat(sa.stddev, sb[0].stddev),
                   logreg::fit_sigmoid_poly(lr_cfg.sigmoid_degree, lr_cfg.sigmoid_lo, lr_cfg.sigmoid_hi), lr_cfg};
    }
    report.repeats.push_back(std::move(m));
  }
  return result;
}

PreprocessResult run_preprocess(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.mode == SplitMode::vertical && cfg.passives == 1, ErrorCode::invalid_argument,
          "preprocess runs on a vertical split with one passive party");
  PreprocessResult out;
  const auto full = load(cfg);
  auto ctx = ckks::Context::create(ckks::FheParams::for_profile(cfg.profile));
  const auto keys = ckks::keygen(ctx, cfg.seed);
  const auto seed = cfg.seed;

  auto v = make_vertical(cfg, full, seed);
  auto record = [&](const std::string& phase, const simnet::Transcript& t, double time_s) {
    out.phases[phase] = stats_of(t, time_s);
    out.transcript.append(t);
  };
  auto t0 = Clock::now();
  record("psi", align(v, cfg.psi_pad, seed), seconds_since(t0));
  out.aligned_rows = v.a.rows();
  out.a_features = v.a_feat;
  out.b_features = v.pf[0];
  out.a = v.a.X;
  out.b = v.b[0].X;
  out.y = v.a.y;
  out.ids = v.a.ids;

  if (cfg.woe) {
    t0 = Clock::now();
    auto w = fit_woe(cfg, out.a, out.y, {out.b}, ctx, keys, seed);
    out.a = encode(out.a, w.a);
    out.b = encode(out.b, w.b[0]);
    out.woe_a = std::move(w.a);
    out.woe_b = std::move(w.b[0]);
    record("woe", w.transcript, seconds_since(t0));
  }
  if (out.a.cols > 0) out.a = data::Scaler::fit(out.a).apply(out.a);
  out.b = data::Scaler::fit(out.b).apply(out.b);
  out.provenance.assign(out.ids.size(), "original");

  if (cfg.smote) {
    require(out.a.cols > 0, ErrorCode::invalid_argument, "smote plans neighbors on A's features");
    t0 = Clock::now();
    const auto sm = in_phase("smote", [&] { return preprocess::smote_fhe(out.a, out.y, out.b, cfg.smote_config, ctx, keys, seed); });
    out.b_correction = preprocess::smote_correction(out.a.rows, sm.active.r_b);
    out.a = vstack(out.a, sm.active.rows);
    out.b = vstack(out.b, sm.passive.rows_masked);
    for (std::size_t i = 0; i < sm.active.rows.rows; ++i) {
      out.y.push_back(cfg.smote_config.minority_label);
      out.ids.push_back("syn" + std::to_string(i));
      out.provenance.emplace_back("synthetic");
    }
    record("smote", sm.transcript, seconds_since(t0));
  }
  return out;
}

double InferenceBenchRow::reduction() const {
  return classic_bytes == 0 ? 0.0 : 1.0 - static_cast<double>(psi_bytes) / static_cast<double>(classic_bytes);
}

json to_json(const InferenceBenchRow& r) {
  return {{"trees", r.trees},
          {"depth", r.depth},
          {"samples", r.samples},
          {"classic_bytes", r.classic_bytes},
          {"psi_bytes", r.psi_bytes},
          {"reduction", r.reduction()},
          {"classic_rounds", r.classic_rounds},
          {"psi_sessions", r.psi_sessions},
          {"passive_path_nodes", r.passive_path_nodes},
          {"predictions_agree", r.predictions_agree},
          {"round_mismatches", r.round_mismatches},
          {"session_mismatches", r.session_mismatches}};
}

std::vector<InferenceBenchRow> bench_inference(const ExperimentConfig& config, const std::vector<int>& trees,
                                               const std::vector<int>& depths) {
  auto cfg = config;
  cfg.model = ModelKind::secureboost;
  cfg.mode = SplitMode::vertical;
  cfg.validate();
  const auto full = load(cfg);
  auto ctx = ckks::Context::create(ckks::FheParams::for_profile(cfg.profile));
  const secureboost::ActiveKeys ak{ctx, ckks::keygen(ctx, cfg.seed)};

  auto v = make_vertical(cfg, full, cfg.seed);
  align(v, cfg.psi_pad, cfg.seed);
  const auto split = data::stratified_split(v.a.y, cfg.test_fraction, cfg.seed);
  auto a_tr = data::select_rows(v.a, split.train), a_te = data::select_rows(v.a, split.test);
  if (a_tr.X.cols > 0) {
    const auto sa = data::Scaler::fit(a_tr.X);
    a_tr.X = sa.apply(a_tr.X);
    a_te.X = sa.apply(a_te.X);
  }
  std::vector<Matrix> b_tr, b_te;
  for (const auto& b : v.b) {
    auto tr = data::select_rows(b, split.train).X, te = data::select_rows(b, split.test).X;
    const auto s = data::Scaler::fit(tr);
    b_tr.push_back(s.apply(tr));
    b_te.push_back(s.apply(te));
  }

  std::vector<InferenceBenchRow> rows;
  for (int t : trees) {
    for (int d : depths) {
      auto sc = cfg.secureboost;
      sc.num_trees = t;
      sc.max_depth = d;
      const auto tr = in_phase("train", [&] { return secureboost::train_ensemble(a_tr.X, a_tr.y, b_tr, sc, ak, cfg.seed); });
      std::vector<secureboost::InferenceShard> ps;
      for (std::size_t k = 0; k < b_te.size(); ++k) ps.push_back({&tr.passive_tables[k], &b_te[k]});
      const secureboost::InferenceShard as{&tr.active_table, &a_te.X};
      const auto classic = secureboost::classic_infer(tr.model, as, ps, cfg.seed);
      const auto psi = secureboost::psi_infer(tr.model, as, ps, cfg.seed);

      InferenceBenchRow r;
      r.trees = t;
      r.depth = d;
      r.samples = a_te.rows();
      r.classic_bytes = simnet::account(classic.transcript).bytes;
      r.psi_bytes = simnet::account(psi.transcript).bytes;
      for (std::size_t s = 0; s < r.samples; ++s) {
        std::uint64_t nodes = 0;
        for (std::size_t k = 0; k < tr.model.trees.size(); ++k)
          nodes += passive_nodes_on_path(tr.model.trees[k], classic.leaves[s][k]);
        r.classic_rounds += classic.per_sample[s].rounds;
        r.psi_sessions += psi.psi_sessions[s];
        r.passive_path_nodes += nodes;
        r.round_mismatches += classic.per_sample[s].rounds != nodes;
        r.session_mismatches += psi.psi_sessions[s] != b_te.size();
      }
      r.predictions_agree = classic.leaves == psi.leaves;
      rows.push_back(r);
    }
  }
  return rows;
}

namespace {

json scaler_json(const ScalerState& s) { return {{"mean", s.mean}, {"stddev", s.stddev}}; }
ScalerState scaler_from(const json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("stddev").get<std::vector<double>>()};
}

}  // namespace

json to_json(const TrainedModels& m) {
  json ps = json::array(), wa = json::array(), wb = json::array();
  for (const auto& s : m.passive_scalers) ps.push_back(scaler_json(s));
  for (const auto& t : m.woe_a) wa.push_back(preprocess::to_json(t));
  for (const auto& t : m.woe_b) wb.push_back(preprocess::to_json(t));
  return {{"format", "fedfhe.parties"},
          {"version", 1},
          {"a_features", m.a_features},
          {"passive_features", m.passive_features},
          {"a_scaler", scaler_json(m.a_scaler)},
          {"passive_scalers", ps},
          {"woe_a", wa},
          {"woe_b", wb}};
}

void write_outputs(const std::string& dir, const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const fs::path d(dir);
  write_json((d / "report.json").string(), to_json(result.report));
  {
    std::ofstream out(d / "metrics.csv");
    require(out.good(), ErrorCode::io, "cannot write metrics.csv");
    out << "repeat,seed,accuracy,train_rows,test_rows,train_time_s\n";
    out.precision(10);
    for (const auto& r : result.report.repeats)
      out << r.repeat << ',' << r.seed << ',' << r.accuracy << ',' << r.train_rows << ',' << r.test_rows << ','
          << r.train_time_s << '\n';
  }
  {
    std::ofstream out(d / "transcript.jsonl");
    require(out.good(), ErrorCode::io, "cannot write transcript.jsonl");
    result.transcript.write_jsonl(out);
  }
  const auto& m = result.models;
  if (result.report.config.model == ModelKind::secureboost) {
    secureboost::save_model((d / "model.json").string(), m.trees);
    secureboost::save_lookup((d / "lookup_active.json").string(), m.active_table);
    for (std::size_t k = 0; k < m.passive_tables.size(); ++k)
      secureboost::save_lookup((d / ("lookup_passive" + std::to_string(k + 1) + ".json")).string(),
                               m.passive_tables[k]);
  } else {
    logreg::save_lr_model((d / "model.json").string(), m.lr);
  }
  write_json((d / "parties.json").string(), to_json(m));
}

TrainedModels load_models(const std::string& dir, ModelKind kind) {
  namespace fs = std::filesystem;
  const fs::path d(dir);
  TrainedModels m;
  const auto j = read_json((d / "parties.json").string());
  check_format(j, "fedfhe.parties", 1);
  try {
    m.a_features = j.at("a_features").get<std::vector<std::string>>();
    m.passive_features = j.at("passive_features").get<std::vector<std::vector<std::string>>>();
    m.a_scaler = scaler_from(j.at("a_scaler"));
    for (const auto& s : j.at("passive_scalers")) m.passive_scalers.push_back(scaler_from(s));
    for (const auto& t : j.at("woe_a")) m.woe_a.push_back(preprocess::woe_table_from_json(t));
    for (const auto& t : j.at("woe_b")) m.woe_b.push_back(preprocess::woe_table_from_json(t));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::decode_failure, std::string("parties.json: ") + e.what());
  }
  if (kind == ModelKind::secureboost) {
    m.trees = secureboost::load_model((d / "model.json").string());
    m.active_table = secureboost::load_lookup((d / "lookup_active.json").string());
    for (std::size_t k = 0; k < m.passive_features.size(); ++k)
      m.passive_tables.push_back(
          secureboost::load_lookup((d / ("lookup_passive" + std::to_string(k + 1) + ".json")).string()));
  } else {
    m.lr = logreg::load_lr_model((d / "model.json").string());
  }
  return m;
}

}  // namespace fedfhe::experiment
