#include "wardboost/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wardboost {

void save_model(const std::string& path, const AnyModel& model) {
  nlohmann::json doc = std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, pews::PewsBaseline>) {
          return pews::baseline_to_json(m);
        } else if constexpr (std::is_same_v<T, ada::AdaModel>) {
          return ada::to_json(m);
        } else if constexpr (std::is_same_v<T, gbt::GbtModel>) {
          return gbt::to_json(m);
        } else {
          return ensemble::to_json(m);
        }
      },
      model);
  doc["type"] = model_type_name(model);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << doc.dump(2) << '\n';
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  const std::string type = doc.value("type", "");
  if (type == "ada") return ada::model_from_json(doc);
  if (type == "gbt") return gbt::model_from_json(doc);
  if (type == "ensemble") return ensemble::model_from_json(doc);
  if (type == "pews") return pews::baseline_from_json(doc);
  throw std::runtime_error(path + ": unknown model type '" + type + "'");
}

const char* model_type_name(const AnyModel& model) {
  switch (model.index()) {
    case 0:
      return "ada";
    case 1:
      return "gbt";
    case 2:
      return "ensemble";
    default:
      return "pews";
  }
}

metrics::Scorer make_scorer(const AnyModel& model) {
  return std::visit(
      [](const auto& m) -> metrics::Scorer {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ada::AdaModel>) {
          return [m](const FeatureSnapshot& x) { return ada::predict_proba(m, x); };
        } else if constexpr (std::is_same_v<T, gbt::GbtModel>) {
          return [m](const FeatureSnapshot& x) { return gbt::predict_proba(m, x); };
        } else if constexpr (std::is_same_v<T, ensemble::EnsembleModel>) {
          return [m](const FeatureSnapshot& x) { return ensemble::predict_proba(m, x); };
        } else {
          return [m](const FeatureSnapshot& x) {
            return static_cast<double>(m.table.score(x));
          };
        }
      },
      model);
}

double default_threshold(const AnyModel& model) {
  if (const auto* baseline = std::get_if<pews::PewsBaseline>(&model)) {
    return static_cast<double>(baseline->cutoff);
  }
  return 0.5;
}

}  // namespace wardboost
