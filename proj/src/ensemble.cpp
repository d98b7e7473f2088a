#include "wardboost/ensemble.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wardboost::ensemble {

double predict_proba(const EnsembleModel& model, const FeatureSnapshot& x) {
  return 0.5 * (ada::predict_proba(model.ada, x) + gbt::predict_proba(model.gbt, x));
}

int classify(const EnsembleModel& model, const FeatureSnapshot& x) {
  return predict_proba(model, x) >= model.decision_threshold ? +1 : -1;
}

nlohmann::json to_json(const EnsembleModel& model) {
  return {{"version", 1},
          {"threshold", model.decision_threshold},
          {"ada", ada::to_json(model.ada)},
          {"gbt", gbt::to_json(model.gbt)}};
}

EnsembleModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("version", 0) != 1) {
    throw std::invalid_argument("unsupported ensemble model document");
  }
  EnsembleModel model;
  model.decision_threshold = j.at("threshold").get<double>();
  if (!(model.decision_threshold > 0.0) || !(model.decision_threshold < 1.0)) {
    throw std::invalid_argument("ensemble threshold must be in (0, 1)");
  }
  model.ada = ada::model_from_json(j.at("ada"));
  model.gbt = gbt::model_from_json(j.at("gbt"));
  return model;
}

}  // namespace wardboost::ensemble
