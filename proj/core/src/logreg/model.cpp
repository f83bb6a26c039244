#include "fedfhe/logreg/model.hpp"

#include <algorithm>

#include "fedfhe/common/error.hpp"
#include "fedfhe/common/json_io.hpp"

namespace fedfhe::logreg {

namespace {
constexpr int kVersion = 1;
constexpr const char* kFormat = "fedfhe.logreg.model";
}  // namespace

double LrModel::predict(const std::vector<double>& raw) const {
  require(raw.size() + 1 == beta.size(), ErrorCode::invalid_argument, "feature count mismatch");
  double t = beta[0];
  for (std::size_t j = 0; j < raw.size(); ++j) {
    const double s = stddev.empty() || stddev[j] == 0 ? 1.0 : stddev[j];
    const double z = std::clamp((raw[j] - (mean.empty() ? 0.0 : mean[j])) / s, -8.0, 8.0);
    t += beta[j + 1] * z;
  }
  return logreg::sigmoid(t);
}

nlohmann::json to_json(const LrConfig& c) {
  return {{"learning_rate", c.learning_rate}, {"decay", c.decay},
          {"iterations", c.iterations},       {"batch_size", c.batch_size},
          {"sigmoid_degree", c.sigmoid_degree}, {"sigmoid_range", {c.sigmoid_lo, c.sigmoid_hi}},
          {"seed", c.seed}};
}

LrConfig lr_config_from_json(const nlohmann::json& j) {
  LrConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.decay = j.value("decay", c.decay);
  c.iterations = j.value("iterations", c.iterations);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.sigmoid_degree = j.value("sigmoid_degree", c.sigmoid_degree);
  if (j.contains("sigmoid_range")) {
    c.sigmoid_lo = j.at("sigmoid_range").at(0).get<double>();
    c.sigmoid_hi = j.at("sigmoid_range").at(1).get<double>();
  }
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

nlohmann::json to_json(const LrModel& m) {
  return {{"format", kFormat},
          {"version", kVersion},
          {"feature_names", m.feature_names},
          {"beta", m.beta},
          {"scaler", {{"mean", m.mean}, {"std", m.stddev}}},
          {"sigmoid_poly",
           {{"degree", m.sigmoid.degree}, {"range", {m.sigmoid.lo, m.sigmoid.hi}}, {"odd_coefficients", m.sigmoid.coeffs}}},
          {"config", to_json(m.config)}};
}

LrModel lr_model_from_json(const nlohmann::json& j) {
  check_format(j, kFormat, kVersion);
  LrModel m;
  try {
    m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    m.beta = j.at("beta").get<std::vector<double>>();
    m.mean = j.at("scaler").at("mean").get<std::vector<double>>();
    m.stddev = j.at("scaler").at("std").get<std::vector<double>>();
    const auto& sp = j.at("sigmoid_poly");
    m.sigmoid.degree = sp.at("degree").get<int>();
    m.sigmoid.lo = sp.at("range").at(0).get<double>();
    m.sigmoid.hi = sp.at("range").at(1).get<double>();
    m.sigmoid.coeffs = sp.at("odd_coefficients").get<std::vector<double>>();
    m.config = lr_config_from_json(j.at("config"));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::decode_failure, e.what());
  }
  require(m.beta.size() == m.feature_names.size() + 1, ErrorCode::decode_failure, "beta/feature count mismatch");
  return m;
}

void save_lr_model(const std::string& path, const LrModel& m) { write_json(path, to_json(m)); }
LrModel load_lr_model(const std::string& path) { return lr_model_from_json(read_json(path)); }

}  // namespace fedfhe::logreg
