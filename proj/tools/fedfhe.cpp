#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "fedfhe/common/error.hpp"
#include "fedfhe/common/json_io.hpp"
#include "fedfhe/data/dataset.hpp"
#include "fedfhe/experiment/experiment.hpp"
#include "fedfhe/psi/psi.hpp"
#include "fedfhe/secureboost/inference.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fedfhe;
using namespace fedfhe::experiment;

namespace {

// A TOML value typed after the default it replaces; CLI11 hands back strings.
json typed(const json& def, const std::vector<std::string>& inputs, const std::string& key) {
  auto scalar = [&](const json& d, const std::string& v) -> json {
    try {
      if (d.is_boolean()) {
        if (v == "true") return true;
        if (v == "false") return false;
        throw std::invalid_argument(v);
      }
      if (d.is_number_unsigned()) return std::stoull(v);
      if (d.is_number_integer()) return std::stoll(v);
      if (d.is_number_float()) return std::stod(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::invalid_argument, "config key '" + key + "': bad value '" + v + "'");
    }
    return v;
  };
  if (def.is_array()) {
    json out = json::array();
    const json elem = def.empty() ? json("") : def.front();
    for (const auto& v : inputs) out.push_back(scalar(elem, v));
    return out;
  }
  require(inputs.size() == 1, ErrorCode::invalid_argument, "config key '" + key + "' takes one value");
  return scalar(def, inputs.front());
}

void set_path(json& j, const json& defaults, const std::vector<std::string>& path, const std::vector<std::string>& inputs) {
  std::string key;
  for (const auto& p : path) key += (key.empty() ? "" : ".") + p;
  json* node = &j;
  const json* def = &defaults;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    node = &(*node)[path[i]];
    def = def && def->contains(path[i]) ? &def->at(path[i]) : nullptr;
  }
  const json fallback = "";
  const json& d = def && def->contains(path.back()) ? def->at(path.back()) : fallback;
  (*node)[path.back()] = typed(d, inputs, key);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, sep);)
    if (!part.empty()) out.push_back(part);
  return out;
}

json read_toml(const std::string& path, const json& defaults) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::io, "cannot read " + path);
  json j = json::object();
  for (const auto& item : CLI::ConfigTOML().from_config(in)) {
    if (item.name == "++" || item.name == "--") continue;
    auto p = item.parents;
    p.push_back(item.name);
    set_path(j, defaults, p, item.inputs);
  }
  return j;
}

struct Flags {
  std::string config;
  std::string dataset;
  std::string label;
  std::string id_column;
  std::string model;
  std::string mode;
  std::string profile;
  std::string out;
  std::optional<int> repeats;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> set;
};

void add_experiment_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "TOML experiment file")->check(CLI::ExistingFile);
  cmd->add_option("--dataset", f.dataset, "CSV with a header row");
  cmd->add_option("--label", f.label, "label column");
  cmd->add_option("--id-column", f.id_column, "sample id column");
  cmd->add_option("--model", f.model, "secureboost or lr")->check(CLI::IsMember({"secureboost", "lr"}));
  cmd->add_option("--mode", f.mode, "horizontal or vertical")->check(CLI::IsMember({"horizontal", "vertical"}));
  cmd->add_option("--repeats", f.repeats, "independent seeded runs")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--profile", f.profile, "FHE parameters: desk or std128")->check(CLI::IsMember({"desk", "std128"}));
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--set", f.set, "override any config key, e.g. secureboost.max_depth=4");
}

ExperimentConfig resolve(const Flags& f) {
  const json defaults = to_json(ExperimentConfig{});
  json j = f.config.empty() ? json::object() : read_toml(f.config, defaults);
  auto put = [&](const char* key, const std::string& v) {
    if (!v.empty()) j[key] = v;
  };
  put("dataset", f.dataset);
  put("label", f.label);
  put("id_column", f.id_column);
  put("model", f.model);
  put("mode", f.mode);
  put("profile", f.profile);
  put("out_dir", f.out);
  if (f.repeats) j["repeats"] = *f.repeats;
  if (f.seed) j["seed"] = *f.seed;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos, ErrorCode::invalid_argument, "--set expects key=value, got '" + kv + "'");
    set_path(j, defaults, split(kv.substr(0, eq), '.'), split(kv.substr(eq + 1), ','));
  }
  auto c = config_from_json(j);
  // Relative dataset paths in a config file are taken from the file's directory.
  if (!f.config.empty() && f.dataset.empty() && fs::path(c.dataset).is_relative() && !fs::exists(c.dataset))
    c.dataset = (fs::path(f.config).parent_path() / c.dataset).string();
  if (c.out_dir.empty()) c.out_dir = "out";
  return c;
}

json account_json(const simnet::Transcript& t) {
  const auto a = simnet::account(t);
  return {{"messages", a.messages}, {"bytes", a.bytes}, {"rounds", a.rounds}};
}

void write_transcript(const fs::path& path, const simnet::Transcript& t) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::io, "cannot write " + path.string());
  t.write_jsonl(out);
}

int cmd_train(const Flags& f) {
  const auto cfg = resolve(f);
  const auto r = run_experiment(cfg);
  write_outputs(cfg.out_dir, r);
  const auto& rep = r.report;
  std::cout << std::fixed << std::setprecision(4) << to_string(cfg.model) << " " << to_string(cfg.mode) << " on "
            << cfg.dataset << ": accuracy " << rep.accuracy_mean() << " +- " << rep.accuracy_std() << " over "
            << rep.repeats.size() << " run(s), train " << std::setprecision(2) << rep.train_time_mean() << " s/run, "
            << simnet::account(r.transcript).bytes << " bytes\n"
            << "wrote " << (fs::path(cfg.out_dir) / "report.json").string() << "\n";
  return 0;
}

struct PsiFlags {
  std::string a, b, id_column = "id", out = "out";
  std::size_t pad = 0;
  std::uint64_t seed = 1;
};

int cmd_psi(const PsiFlags& f) {
  const auto ids_a = data::read_ids(f.a, f.id_column);
  const auto ids_b = data::read_ids(f.b, f.id_column);
  auto pad = [&](std::vector<std::string> ids, const char* tag) {
    for (std::size_t i = 0; ids.size() < f.pad; ++i) ids.push_back(std::string("~") + tag + "-pad-" + std::to_string(i));
    return ids;
  };
  const auto r = psi::align_samples(pad(ids_a, "a"), pad(ids_b, "b"), f.seed);
  fs::create_directories(f.out);
  {
    std::ofstream out(fs::path(f.out) / "intersection.csv");
    out << f.id_column << "\n";
    for (const auto& id : r.ids_a) out << id << "\n";
  }
  write_transcript(fs::path(f.out) / "transcript.jsonl", r.transcript);
  write_json((fs::path(f.out) / "report.json").string(), {{"format", "fedfhe.psi"},
                                                          {"version", 1},
                                                          {"a_rows", ids_a.size()},
                                                          {"b_rows", ids_b.size()},
                                                          {"padded_to", f.pad},
                                                          {"intersection", r.ids_a.size()},
                                                          {"transcript", account_json(r.transcript)}});
  std::cout << "intersection " << r.ids_a.size() << " of " << ids_a.size() << " x " << ids_b.size() << " ids, "
            << simnet::account(r.transcript).bytes << " bytes\n";
  return 0;
}

int cmd_preprocess(const Flags& f) {
  const auto cfg = resolve(f);
  const auto p = run_preprocess(cfg);
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  data::Dataset a{p.ids, p.a_features, p.a, cfg.label, p.y};
  data::Dataset b{p.ids, p.b_features, p.b, "", {}};
  data::write_csv((out / "party_a.csv").string(), a, p.provenance);
  data::write_csv((out / "party_b.csv").string(), b, p.provenance);
  if (p.b_correction.rows > 0) {
    // A's private correction, added at B's columns during training
    data::Dataset c{p.ids, p.b_features, p.b_correction, "", {}};
    data::write_csv((out / "party_a_correction.csv").string(), c, p.provenance);
  }
  if (cfg.woe) {
    json wa = json::array(), wb = json::array();
    for (const auto& t : p.woe_a) wa.push_back(preprocess::to_json(t));
    for (const auto& t : p.woe_b) wb.push_back(preprocess::to_json(t));
    write_json((out / "woe.json").string(), {{"a", wa}, {"b", wb}});
  }
  write_transcript(out / "transcript.jsonl", p.transcript);
  json phases = json::object();
  for (const auto& [k, v] : p.phases)
    phases[k] = {{"time_s", v.time_s}, {"messages", v.messages}, {"bytes", v.bytes}, {"rounds", v.rounds}};
  const auto synthetic = p.a.rows - p.aligned_rows;
  write_json((out / "report.json").string(), {{"format", "fedfhe.preprocess"},
                                              {"version", 1},
                                              {"config", to_json(cfg)},
                                              {"aligned_rows", p.aligned_rows},
                                              {"output_rows", p.a.rows},
                                              {"synthetic_rows", synthetic},
                                              {"phases", phases}});
  std::cout << "aligned " << p.aligned_rows << " rows, wrote " << p.a.rows << " (" << synthetic
            << " synthetic) to " << out.string() << "\n";
  return 0;
}

struct InferFlags {
  Flags exp;
  std::string model_dir;
  std::string method = "both";
  bool unlabelled = false;
};

Matrix prepare(const data::Dataset& d, const std::vector<std::string>& names, const std::vector<preprocess::WoeTable>& woe,
               const ScalerState& s) {
  auto X = data::select_features(d, names).X;
  if (!woe.empty()) X = preprocess::woe_encode(X, woe);
  return data::Scaler{s.mean, s.stddev}.apply(X);
}

// LR columns run A's features then B's, and so do the tables.
std::vector<preprocess::WoeTable> concat_woe(const TrainedModels& m) {
  auto all = m.woe_a;
  all.insert(all.end(), m.woe_b.begin(), m.woe_b.end());
  return all;
}

int cmd_infer(const InferFlags& f) {
  const fs::path dir(f.model_dir);
  const auto trained = config_from_json(read_json((dir / "report.json").string()).at("config"));
  auto flags = f.exp;
  auto cfg = trained;
  if (!flags.dataset.empty()) cfg.dataset = flags.dataset;
  if (!flags.label.empty()) cfg.label = flags.label;
  if (!flags.id_column.empty()) cfg.id_column = flags.id_column;
  if (flags.seed) cfg.seed = *flags.seed;
  const std::string out_dir = flags.out.empty() ? "out" : flags.out;

  const auto d = data::load_csv(cfg.dataset, {f.unlabelled ? "" : cfg.label, cfg.id_column, cfg.positive, {}});
  const auto m = load_models(f.model_dir, trained.model);
  std::vector<double> score;
  json report = {{"format", "fedfhe.inference"}, {"version", 1}, {"model", to_string(trained.model)}, {"rows", d.rows()}};
  simnet::Transcript transcript;

  if (trained.model == ModelKind::secureboost) {
    const auto XA = prepare(d, m.a_features, m.woe_a, m.a_scaler);
    std::vector<Matrix> XB;
    std::size_t w = 0;
    for (std::size_t k = 0; k < m.passive_features.size(); ++k) {
      std::vector<preprocess::WoeTable> tables;
      if (!m.woe_b.empty())
        tables.assign(m.woe_b.begin() + static_cast<std::ptrdiff_t>(w),
                      m.woe_b.begin() + static_cast<std::ptrdiff_t>(w + m.passive_features[k].size()));
      w += m.passive_features[k].size();
      XB.push_back(prepare(d, m.passive_features[k], tables, m.passive_scalers[k]));
    }
    std::vector<secureboost::InferenceShard> ps;
    for (std::size_t k = 0; k < XB.size(); ++k) ps.push_back({&m.passive_tables[k], &XB[k]});
    const secureboost::InferenceShard as{&m.active_table, &XA};
    require(f.method == "classic" || f.method == "psi" || f.method == "both", ErrorCode::invalid_argument,
            "method must be classic, psi or both");
    std::optional<secureboost::InferResult> classic, psi_r;
    if (f.method != "psi") {
      classic = secureboost::classic_infer(m.trees, as, ps, cfg.seed);
      report["classic"] = account_json(classic->transcript);
      transcript.append(classic->transcript);
    }
    if (f.method != "classic") {
      psi_r = secureboost::psi_infer(m.trees, as, ps, cfg.seed);
      report["psi"] = account_json(psi_r->transcript);
      transcript.append(psi_r->transcript);
    }
    if (classic && psi_r) report["methods_agree"] = classic->leaves == psi_r->leaves;
    score = classic ? classic->margins : psi_r->margins;
  } else {
    const auto& lm = m.lr;
    auto X = data::select_features(d, lm.feature_names).X;
    const auto woe = concat_woe(m);
    if (!woe.empty()) X = preprocess::woe_encode(X, woe);
    X = data::Scaler{lm.mean, lm.stddev}.apply(X);
    for (std::size_t i = 0; i < X.rows; ++i) {
      double t = lm.beta[0];
      for (std::size_t j = 0; j < X.cols; ++j) t += lm.beta[j + 1] * X(i, j);
      score.push_back(t);
    }
  }

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "predictions.csv");
    out << "id,score,prediction" << (d.labelled() ? ",label" : "") << "\n";
    out.precision(10);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      out << d.ids[i] << ',' << score[i] << ',' << (score[i] > 0 ? 1 : 0);
      if (d.labelled()) out << ',' << d.y[i];
      out << '\n';
    }
  }
  if (d.labelled()) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < d.rows(); ++i) ok += (score[i] > 0) == (d.y[i] == 1);
    report["accuracy"] = static_cast<double>(ok) / static_cast<double>(d.rows());
  }
  write_transcript(fs::path(out_dir) / "transcript.jsonl", transcript);
  write_json((fs::path(out_dir) / "report.json").string(), report);
  std::cout << report.dump(2) << "\n";
  return 0;
}

struct BenchFlags {
  Flags exp;
  std::string trees = "1,2,3";
  std::string depths = "1,2,3,4,5";
};

std::vector<int> int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& p : split(s, ',')) out.push_back(std::stoi(p));
  return out;
}

int cmd_bench(const BenchFlags& f) {
  auto cfg = resolve(f.exp);
  const auto rows = bench_inference(cfg, int_list(f.trees), int_list(f.depths));
  fs::create_directories(cfg.out_dir);
  json arr = json::array();
  std::ofstream csv(fs::path(cfg.out_dir) / "inference_bench.csv");
  csv << "trees,depth,samples,classic_bytes,psi_bytes,reduction,classic_rounds,psi_sessions\n";
  std::printf("%5s %5s %14s %14s %9s %8s %8s\n", "trees", "depth", "classic bytes", "psi bytes", "reduction",
              "rounds", "psi");
  for (const auto& r : rows) {
    arr.push_back(to_json(r));
    csv << r.trees << ',' << r.depth << ',' << r.samples << ',' << r.classic_bytes << ',' << r.psi_bytes << ','
        << r.reduction() << ',' << r.classic_rounds << ',' << r.psi_sessions << '\n';
    std::printf("%5d %5d %14llu %14llu %8.1f%% %8llu %8llu\n", r.trees, r.depth,
                static_cast<unsigned long long>(r.classic_bytes), static_cast<unsigned long long>(r.psi_bytes),
                100.0 * r.reduction(), static_cast<unsigned long long>(r.classic_rounds),
                static_cast<unsigned long long>(r.psi_sessions));
  }
  write_json((fs::path(cfg.out_dir) / "inference_bench.json").string(),
             {{"format", "fedfhe.inference_bench"}, {"version", 1}, {"config", to_json(cfg)}, {"rows", arr}});
  return 0;
}

int cmd_report(const std::vector<std::string>& files) {
  std::printf("%-12s %-11s %-10s %7s %8s %8s %10s %14s  %s\n", "model", "mode", "digest", "runs", "acc", "std",
              "train s", "bytes", "dataset");
  for (const auto& file : files) {
    const auto j = read_json(file);
    check_format(j, "fedfhe.report", 1);
    const auto& c = j.at("config");
    std::printf("%-12s %-11s %-10s %7zu %8.4f %8.4f %10.2f %14llu  %s\n", c.at("model").get<std::string>().c_str(),
                c.at("mode").get<std::string>().c_str(), j.at("config_digest").get<std::string>().substr(0, 10).c_str(),
                j.at("repeats").size(), j.at("accuracy").at("mean").get<double>(),
                j.at("accuracy").at("std").get<double>(), j.at("train_time_s").get<double>(),
                static_cast<unsigned long long>(j.at("transcript").at("bytes").get<std::uint64_t>()),
                c.at("dataset").get<std::string>().c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated learning over approximate homomorphic encryption"};
  app.require_subcommand(1);

  Flags train_f;
  auto* train = app.add_subcommand("train", "run an experiment and write report, transcript and models");
  add_experiment_flags(train, train_f);

  PsiFlags psi_f;
  auto* psi = app.add_subcommand("psi", "private intersection of the id columns of two CSV files");
  psi->add_option("--a", psi_f.a, "receiver CSV")->required()->check(CLI::ExistingFile);
  psi->add_option("--b", psi_f.b, "sender CSV")->required()->check(CLI::ExistingFile);
  psi->add_option("--id-column", psi_f.id_column, "id column in both files");
  psi->add_option("--pad", psi_f.pad, "pad each side with private dummies to this many ids");
  psi->add_option("--seed", psi_f.seed, "protocol seed");
  psi->add_option("--out", psi_f.out, "output directory");

  Flags pre_f;
  auto* pre = app.add_subcommand("preprocess", "vertical WOE and SMOTE under encryption; writes both parties' tables");
  add_experiment_flags(pre, pre_f);

  InferFlags inf_f;
  auto* inf = app.add_subcommand("infer", "score a dataset with a model directory written by train");
  inf->add_option("--model-dir", inf_f.model_dir, "directory written by train")->required()->check(CLI::ExistingDirectory);
  inf->add_option("--dataset", inf_f.exp.dataset, "CSV to score (default: the training dataset)");
  inf->add_option("--label", inf_f.exp.label, "label column");
  inf->add_option("--id-column", inf_f.exp.id_column, "sample id column");
  inf->add_option("--method", inf_f.method, "secureboost: classic, psi or both")
      ->check(CLI::IsMember({"classic", "psi", "both"}));
  inf->add_flag("--unlabelled", inf_f.unlabelled, "the dataset has no label column");
  inf->add_option("--seed", inf_f.exp.seed, "protocol seed");
  inf->add_option("--out", inf_f.exp.out, "output directory");

  BenchFlags bench_f;
  auto* bench = app.add_subcommand("bench-inference", "classic against PSI inference traffic over trees x depth");
  add_experiment_flags(bench, bench_f.exp);
  bench->add_option("--trees", bench_f.trees, "comma separated tree counts");
  bench->add_option("--depths", bench_f.depths, "comma separated depths");

  std::vector<std::string> report_files;
  auto* report = app.add_subcommand("report", "summarize report.json files");
  report->add_option("files", report_files, "report.json files")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(train_f);
    if (*psi) return cmd_psi(psi_f);
    if (*pre) return cmd_preprocess(pre_f);
    if (*inf) return cmd_infer(inf_f);
    if (*bench) return cmd_bench(bench_f);
    if (*report) return cmd_report(report_files);
  } catch (const Error& e) {
    std::cerr << "fedfhe: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "fedfhe: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
