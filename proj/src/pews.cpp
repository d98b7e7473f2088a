#include "wardboost/pews.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wardboost::pews {

namespace {

// Default sub-score table for the modified score: heart rate, systolic
// blood pressure and respiratory rate are age-banded, oxygen saturation is
// not. Interval bounds follow the Bedside PEWS pattern of escalating
// sub-scores (0/1/2/4) away from the age-appropriate normal range; a null
// bound means +-infinity.
constexpr const char* kDefaultTableJson = R"json({
  "items": [
    {"name": "HR", "age_bands": [
      {"lo_years": 0, "hi_years": 0.25, "intervals": [
        {"lo": null, "hi": 80, "score": 4}, {"lo": 80, "hi": 90, "score": 2},
        {"lo": 90, "hi": 110, "score": 1}, {"lo": 110, "hi": 150, "score": 0},
        {"lo": 150, "hi": 180, "score": 1}, {"lo": 180, "hi": 190, "score": 2},
        {"lo": 190, "hi": null, "score": 4}]},
      {"lo_years": 0.25, "hi_years": 1, "intervals": [
        {"lo": null, "hi": 70, "score": 4}, {"lo": 70, "hi": 80, "score": 2},
        {"lo": 80, "hi": 100, "score": 1}, {"lo": 100, "hi": 150, "score": 0},
        {"lo": 150, "hi": 170, "score": 1}, {"lo": 170, "hi": 180, "score": 2},
        {"lo": 180, "hi": null, "score": 4}]},
      {"lo_years": 1, "hi_years": 4, "intervals": [
        {"lo": null, "hi": 60, "score": 4}, {"lo": 60, "hi": 70, "score": 2},
        {"lo": 70, "hi": 90, "score": 1}, {"lo": 90, "hi": 120, "score": 0},
        {"lo": 120, "hi": 150, "score": 1}, {"lo": 150, "hi": 170, "score": 2},
        {"lo": 170, "hi": null, "score": 4}]},
      {"lo_years": 4, "hi_years": 12, "intervals": [
        {"lo": null, "hi": 50, "score": 4}, {"lo": 50, "hi": 60, "score": 2},
        {"lo": 60, "hi": 70, "score": 1}, {"lo": 70, "hi": 110, "score": 0},
        {"lo": 110, "hi": 130, "score": 1}, {"lo": 130, "hi": 150, "score": 2},
        {"lo": 150, "hi": null, "score": 4}]},
      {"lo_years": 12, "hi_years": 20, "intervals": [
        {"lo": null, "hi": 40, "score": 4}, {"lo": 40, "hi": 50, "score": 2},
        {"lo": 50, "hi": 60, "score": 1}, {"lo": 60, "hi": 100, "score": 0},
        {"lo": 100, "hi": 120, "score": 1}, {"lo": 120, "hi": 140, "score": 2},
        {"lo": 140, "hi": null, "score": 4}]}]},
    {"name": "sBP", "age_bands": [
      {"lo_years": 0, "hi_years": 0.25, "intervals": [
        {"lo": null, "hi": 50, "score": 4}, {"lo": 50, "hi": 55, "score": 2},
        {"lo": 55, "hi": 60, "score": 1}, {"lo": 60, "hi": 100, "score": 0},
        {"lo": 100, "hi": 120, "score": 1}, {"lo": 120, "hi": 130, "score": 2},
        {"lo": 130, "hi": null, "score": 4}]},
      {"lo_years": 0.25, "hi_years": 1, "intervals": [
        {"lo": null, "hi": 55, "score": 4}, {"lo": 55, "hi": 65, "score": 2},
        {"lo": 65, "hi": 75, "score": 1}, {"lo": 75, "hi": 105, "score": 0},
        {"lo": 105, "hi": 125, "score": 1}, {"lo": 125, "hi": 135, "score": 2},
        {"lo": 135, "hi": null, "score": 4}]},
      {"lo_years": 1, "hi_years": 4, "intervals": [
        {"lo": null, "hi": 60, "score": 4}, {"lo": 60, "hi": 70, "score": 2},
        {"lo": 70, "hi": 80, "score": 1}, {"lo": 80, "hi": 110, "score": 0},
        {"lo": 110, "hi": 125, "score": 1}, {"lo": 125, "hi": 140, "score": 2},
        {"lo": 140, "hi": null, "score": 4}]},
      {"lo_years": 4, "hi_years": 12, "intervals": [
        {"lo": null, "hi": 65, "score": 4}, {"lo": 65, "hi": 75, "score": 2},
        {"lo": 75, "hi": 85, "score": 1}, {"lo": 85, "hi": 120, "score": 0},
        {"lo": 120, "hi": 135, "score": 1}, {"lo": 135, "hi": 150, "score": 2},
        {"lo": 150, "hi": null, "score": 4}]},
      {"lo_years": 12, "hi_years": 20, "intervals": [
        {"lo": null, "hi": 70, "score": 4}, {"lo": 70, "hi": 80, "score": 2},
        {"lo": 80, "hi": 90, "score": 1}, {"lo": 90, "hi": 130, "score": 0},
        {"lo": 130, "hi": 145, "score": 1}, {"lo": 145, "hi": 160, "score": 2},
        {"lo": 160, "hi": null, "score": 4}]}]},
    {"name": "RR", "age_bands": [
      {"lo_years": 0, "hi_years": 0.25, "intervals": [
        {"lo": null, "hi": 10, "score": 4}, {"lo": 10, "hi": 15, "score": 2},
        {"lo": 15, "hi": 25, "score": 1}, {"lo": 25, "hi": 60, "score": 0},
        {"lo": 60, "hi": 70, "score": 1}, {"lo": 70, "hi": 80, "score": 2},
        {"lo": 80, "hi": null, "score": 4}]},
      {"lo_years": 0.25, "hi_years": 1, "intervals": [
        {"lo": null, "hi": 10, "score": 4}, {"lo": 10, "hi": 15, "score": 2},
        {"lo": 15, "hi": 20, "score": 1}, {"lo": 20, "hi": 50, "score": 0},
        {"lo": 50, "hi": 60, "score": 1}, {"lo": 60, "hi": 70, "score": 2},
        {"lo": 70, "hi": null, "score": 4}]},
      {"lo_years": 1, "hi_years": 4, "intervals": [
        {"lo": null, "hi": 8, "score": 4}, {"lo": 8, "hi": 12, "score": 2},
        {"lo": 12, "hi": 18, "score": 1}, {"lo": 18, "hi": 40, "score": 0},
        {"lo": 40, "hi": 50, "score": 1}, {"lo": 50, "hi": 60, "score": 2},
        {"lo": 60, "hi": null, "score": 4}]},
      {"lo_years": 4, "hi_years": 12, "intervals": [
        {"lo": null, "hi": 6, "score": 4}, {"lo": 6, "hi": 10, "score": 2},
        {"lo": 10, "hi": 14, "score": 1}, {"lo": 14, "hi": 30, "score": 0},
        {"lo": 30, "hi": 40, "score": 1}, {"lo": 40, "hi": 50, "score": 2},
        {"lo": 50, "hi": null, "score": 4}]},
      {"lo_years": 12, "hi_years": 20, "intervals": [
        {"lo": null, "hi": 5, "score": 4}, {"lo": 5, "hi": 8, "score": 2},
        {"lo": 8, "hi": 12, "score": 1}, {"lo": 12, "hi": 24, "score": 0},
        {"lo": 24, "hi": 32, "score": 1}, {"lo": 32, "hi": 40, "score": 2},
        {"lo": 40, "hi": null, "score": 4}]}]},
    {"name": "O2", "age_bands": [
      {"lo_years": 0, "hi_years": 20, "intervals": [
        {"lo": null, "hi": 85, "score": 4}, {"lo": 85, "hi": 91, "score": 2},
        {"lo": 91, "hi": 95, "score": 1}, {"lo": 95, "hi": null, "score": 0}]}]}
  ]
})json";

int feature_for_item(const std::string& name) {
  if (name == "HR") return kFeatHR;
  if (name == "sBP") return kFeatSBP;
  if (name == "RR") return kFeatRR;
  if (name == "O2") return kFeatO2;
  throw std::invalid_argument("unknown PEWS item '" + name + "'");
}

double bound_from_json(const nlohmann::json& j, double infinity) {
  if (j.is_null()) return infinity;
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw std::invalid_argument("interval bounds must be finite or null");
  return v;
}

nlohmann::json bound_to_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

void validate_item(const ScoreItem& item) {
  const std::string where = "PEWS item " + item.name;
  if (item.age_bands.empty()) throw std::invalid_argument(where + ": no age bands");
  if (item.age_bands.front().lo_years != 0.0 ||
      item.age_bands.back().hi_years < kMaxAgeYears) {
    throw std::invalid_argument(where + ": age bands must cover [0, 20)");
  }
  for (std::size_t b = 0; b < item.age_bands.size(); ++b) {
    const AgeBand& band = item.age_bands[b];
    if (!(band.lo_years < band.hi_years)) {
      throw std::invalid_argument(where + ": empty age band");
    }
    if (b > 0 && band.lo_years != item.age_bands[b - 1].hi_years) {
      throw std::invalid_argument(where + ": age bands have a gap or overlap");
    }
    if (band.intervals.empty()) throw std::invalid_argument(where + ": band has no intervals");
    if (!std::isinf(band.intervals.front().lo) || !std::isinf(band.intervals.back().hi)) {
      throw std::invalid_argument(where + ": intervals must cover the whole value range");
    }
    for (std::size_t i = 0; i < band.intervals.size(); ++i) {
      const ScoreInterval& iv = band.intervals[i];
      if (!(iv.lo < iv.hi)) throw std::invalid_argument(where + ": empty interval");
      if (iv.score < 0) throw std::invalid_argument(where + ": negative sub-score");
      if (i > 0 && iv.lo != band.intervals[i - 1].hi) {
        throw std::invalid_argument(where + ": intervals have a gap or overlap");
      }
    }
  }
}

}  // namespace

PewsTable::PewsTable(std::vector<ScoreItem> items) : items_(std::move(items)) {}

PewsTable PewsTable::default_table() {
  return from_json(nlohmann::json::parse(kDefaultTableJson));
}

PewsTable PewsTable::from_json(const nlohmann::json& j) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  if (!j.is_object() || !j.contains("items")) {
    throw std::invalid_argument("PEWS config must be an object with an 'items' array");
  }
  std::vector<ScoreItem> items;
  for (const auto& ji : j.at("items")) {
    ScoreItem item;
    item.name = ji.at("name").get<std::string>();
    item.feature = feature_for_item(item.name);
    for (const auto& jb : ji.at("age_bands")) {
      AgeBand band;
      band.lo_years = jb.at("lo_years").get<double>();
      band.hi_years = jb.at("hi_years").get<double>();
      for (const auto& jiv : jb.at("intervals")) {
        ScoreInterval iv;
        iv.lo = bound_from_json(jiv.at("lo"), -kInf);
        iv.hi = bound_from_json(jiv.at("hi"), kInf);
        iv.score = jiv.at("score").get<int>();
        band.intervals.push_back(iv);
      }
      item.age_bands.push_back(std::move(band));
    }
    validate_item(item);
    for (const auto& existing : items) {
      if (existing.name == item.name) {
        throw std::invalid_argument("duplicate PEWS item '" + item.name + "'");
      }
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) throw std::invalid_argument("PEWS config has no items");
  return PewsTable(std::move(items));
}

nlohmann::json PewsTable::to_json() const {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : items_) {
    nlohmann::json bands = nlohmann::json::array();
    for (const auto& band : item.age_bands) {
      nlohmann::json intervals = nlohmann::json::array();
      for (const auto& iv : band.intervals) {
        intervals.push_back(
            {{"lo", bound_to_json(iv.lo)}, {"hi", bound_to_json(iv.hi)}, {"score", iv.score}});
      }
      bands.push_back({{"lo_years", band.lo_years},
                       {"hi_years", band.hi_years},
                       {"intervals", std::move(intervals)}});
    }
    items.push_back({{"name", item.name}, {"age_bands", std::move(bands)}});
  }
  return {{"items", std::move(items)}};
}

int PewsTable::item_subscore(int item_index, std::optional<double> value,
                             double age_years) const {
  if (!value) return 0;
  const ScoreItem& item = items_[item_index];
  const AgeBand* band = &item.age_bands.back();
  for (const auto& b : item.age_bands) {
    if (age_years >= b.lo_years && age_years < b.hi_years) {
      band = &b;
      break;
    }
  }
  for (const auto& iv : band->intervals) {
    if (*value >= iv.lo && *value < iv.hi) return iv.score;
  }
  return band->intervals.back().score;  // unreachable for validated tables
}

int PewsTable::score(const FeatureSnapshot& x) const {
  int total = 0;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    total += item_subscore(static_cast<int>(i), x.values[items_[i].feature], x.age());
  }
  return total;
}

int PewsTable::max_score() const {
  int total = 0;
  for (const auto& item : items_) {
    int item_max = 0;
    for (const auto& band : item.age_bands) {
      for (const auto& iv : band.intervals) item_max = std::max(item_max, iv.score);
    }
    total += item_max;
  }
  return total;
}

int select_cutoff(std::span<const int> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  long long pos = 0, neg = 0;
  int max_score = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] > 0 ? pos : neg)++;
    max_score = std::max(max_score, scores[i]);
  }
  if (pos == 0 || neg == 0) throw std::runtime_error("both classes required to select a cutoff");

  int best_cutoff = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  double best_sens = -1.0;
  for (int c = 0; c <= max_score + 1; ++c) {
    long long tp = 0, tn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= c) {
        if (labels[i] > 0) ++tp;
      } else if (labels[i] < 0) {
        ++tn;
      }
    }
    const double sens = static_cast<double>(tp) / static_cast<double>(pos);
    const double spec = static_cast<double>(tn) / static_cast<double>(neg);
    const double gap = std::abs(sens - spec);
    if (gap < best_gap || (gap == best_gap && sens > best_sens)) {
      best_gap = gap;
      best_sens = sens;
      best_cutoff = c;
    }
  }
  return best_cutoff;
}

int select_cutoff(const PewsTable& table, std::span<const FeatureSnapshot> train) {
  std::vector<int> scores;
  std::vector<int> labels;
  scores.reserve(train.size());
  labels.reserve(train.size());
  for (const auto& x : train) {
    scores.push_back(table.score(x));
    labels.push_back(x.label);
  }
  return select_cutoff(scores, labels);
}

int classify(const PewsBaseline& baseline, const FeatureSnapshot& x) {
  return baseline.table.score(x) >= baseline.cutoff ? +1 : -1;
}

nlohmann::json baseline_to_json(const PewsBaseline& baseline) {
  return {{"version", 1}, {"cutoff", baseline.cutoff}, {"table", baseline.table.to_json()}};
}

PewsBaseline baseline_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("version", 0) != 1) {
    throw std::invalid_argument("unsupported pews model document");
  }
  PewsBaseline baseline;
  baseline.cutoff = j.at("cutoff").get<int>();
  if (baseline.cutoff < 0) throw std::invalid_argument("cutoff must be >= 0");
  baseline.table = PewsTable::from_json(j.at("table"));
  return baseline;
}

}  // namespace wardboost::pews
