#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wardboost/dataset.hpp"

namespace wardboost::pews {

// Half-open [lo, hi); +-infinity bounds are allowed at the edges.
struct ScoreInterval {
  double lo = 0.0;
  double hi = 0.0;
  int score = 0;
};

struct AgeBand {
  double lo_years = 0.0;
  double hi_years = 0.0;
  std::vector<ScoreInterval> intervals;
};

struct ScoreItem {
  std::string name;  // HR, sBP, RR, O2
  int feature = 0;   // FeatureIndex the item reads
  std::vector<AgeBand> age_bands;
};

// Age-banded sub-score lookup for the four items retained from Bedside PEWS
// (capillary refill, respiratory effort and oxygen therapy are dropped).
// Loading validates that bands cover [0, 20) and that each band's intervals
// cover the whole real line with no gaps or overlaps.
class PewsTable {
 public:
  static PewsTable default_table();
  static PewsTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  // Missing values score 0; otherwise the score of the interval containing
  // the value within the item's age band.
  int item_subscore(int item_index, std::optional<double> value, double age_years) const;

  // Sum of the four item sub-scores.
  int score(const FeatureSnapshot& x) const;

  int max_score() const;
  const std::vector<ScoreItem>& items() const { return items_; }

 private:
  explicit PewsTable(std::vector<ScoreItem> items);
  std::vector<ScoreItem> items_;
};

struct PewsBaseline {
  PewsTable table = PewsTable::default_table();
  int cutoff = 0;
};

// Sweeps every integer cutoff in [0, max score + 1] for the rule
// "transfer iff score >= cutoff" and returns the one minimizing
// |sensitivity - specificity|; ties prefer higher sensitivity, then the
// smaller cutoff.
int select_cutoff(std::span<const int> scores, std::span<const int> labels);
int select_cutoff(const PewsTable& table, std::span<const FeatureSnapshot> train);

// +1 iff the score matches or exceeds the cutoff.
int classify(const PewsBaseline& baseline, const FeatureSnapshot& x);

nlohmann::json baseline_to_json(const PewsBaseline& baseline);
PewsBaseline baseline_from_json(const nlohmann::json& j);

}  // namespace wardboost::pews
