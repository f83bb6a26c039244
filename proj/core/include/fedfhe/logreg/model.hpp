#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "fedfhe/logreg/gradient.hpp"
#include "fedfhe/logreg/sigmoid.hpp"

namespace fedfhe::logreg {

// beta[0] is the bias; beta[j + 1] pairs with feature_names[j] after
// standardization with mean[j], stddev[j].
struct LrModel {
  std::vector<std::string> feature_names;
  std::vector<double> beta;
  std::vector<double> mean;
  std::vector<double> stddev;
  SigmoidPoly sigmoid;
  LrConfig config;

  // Probability from raw (unstandardized) features.
  double predict(const std::vector<double>& raw) const;
};

nlohmann::json to_json(const LrModel& m);
LrModel lr_model_from_json(const nlohmann::json& j);
void save_lr_model(const std::string& path, const LrModel& m);
LrModel load_lr_model(const std::string& path);

nlohmann::json to_json(const LrConfig& c);
LrConfig lr_config_from_json(const nlohmann::json& j);

}  // namespace fedfhe::logreg
