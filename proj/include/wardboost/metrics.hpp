#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wardboost/dataset.hpp"

namespace wardboost::metrics {

struct Confusion {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;
};

// Standard counts with +1 as the positive class.
Confusion confusion(std::span<const int> labels, std::span<const int> predictions);

// Pairwise concordance probability with ties counted 1/2 (Mann-Whitney).
// Requires both classes.
double auroc(std::span<const double> scores, std::span<const int> labels);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

// One point per unique score threshold (rule: positive iff score >=
// threshold) plus the (0,0) endpoint; ends at (1,1). Trapezoidal area
// equals auroc().
std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels);

double trapezoid_area(std::span<const RocPoint> points);

struct EvalReport {
  Confusion counts;
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double auroc = 0.0;
  std::vector<RocPoint> roc;
};

// Scores a labeled set at the given decision threshold (>= predicts +1).
EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold);

// A trainer maps a training set to a scoring function for single snapshots.
using Scorer = std::function<double(const FeatureSnapshot&)>;
using Trainer = std::function<Scorer(std::span<const FeatureSnapshot>)>;

struct CvResult {
  std::vector<double> fold_aurocs;
  double mean_auroc = 0.0;
};

// Patient-disjoint k-fold cross validation: fit on each fold's training
// side, score the held-out fold, report per-fold AUROC and the mean.
CvResult cross_validate(const Trainer& trainer, std::span<const FeatureSnapshot> cohort,
                        int k, std::uint64_t seed);

nlohmann::json report_to_json(const EvalReport& report);

// ROC CSV: fpr,tpr,threshold
void write_roc_csv(const std::string& path, std::span<const RocPoint> points);

}  // namespace wardboost::metrics
