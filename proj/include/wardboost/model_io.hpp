#pragma once

#include <string>
#include <variant>

#include "wardboost/ensemble.hpp"
#include "wardboost/metrics.hpp"
#include "wardboost/pews.hpp"

namespace wardboost {

using AnyModel = std::variant<ada::AdaModel, gbt::GbtModel, ensemble::EnsembleModel,
                              pews::PewsBaseline>;

// Model files carry a "type" discriminator next to the per-model document.
void save_model(const std::string& path, const AnyModel& model);
AnyModel load_model(const std::string& path);

const char* model_type_name(const AnyModel& model);

// Score used for ranking/ROC: predicted probability for the boosting
// models, the raw integer score for the PEWS baseline.
metrics::Scorer make_scorer(const AnyModel& model);

// Decision threshold the model classifies with (the PEWS cutoff, or 0.5).
double default_threshold(const AnyModel& model);

}  // namespace wardboost
