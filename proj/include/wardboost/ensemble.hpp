#pragma once

#include <nlohmann/json_fwd.hpp>

#include "wardboost/ada.hpp"
#include "wardboost/gbt.hpp"

namespace wardboost::ensemble {

struct EnsembleModel {
  ada::AdaModel ada;
  gbt::GbtModel gbt;
  double decision_threshold = 0.5;
};

// Mean of the two sub-model probabilities.
double predict_proba(const EnsembleModel& model, const FeatureSnapshot& x);

// +1 iff the probability is at or above the decision threshold.
int classify(const EnsembleModel& model, const FeatureSnapshot& x);

nlohmann::json to_json(const EnsembleModel& model);
EnsembleModel model_from_json(const nlohmann::json& j);

}  // namespace wardboost::ensemble
