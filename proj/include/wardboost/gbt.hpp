#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wardboost/dataset.hpp"

namespace wardboost::gbt {

struct GbtParams {
  int num_trees = 16;
  int max_depth = 3;
  double learning_rate = 0.3;
  double lambda = 1.0;            // L2 penalty on leaf scores
  double gamma = 0.0;             // per-leaf penalty
  double min_child_weight = 1.0;  // minimum hessian sum per child
  double colsample = 1.0;         // fraction of features sampled per tree
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument naming the offending field.
void validate(const GbtParams& params);

// Nodes are stored in a flat vector per tree; index 0 is the root.
struct TreeNode {
  bool is_leaf = true;
  double leaf_value = 0.0;
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;  // where missing values are routed
  int left = -1;
  int right = -1;
};

struct Tree {
  std::vector<TreeNode> nodes;
  double predict(const FeatureSnapshot& x) const;
};

struct GbtModel {
  std::vector<Tree> trees;
  double base_score = 0.0;  // initial log-odds
  GbtParams params;
};

struct GradHess {
  double g = 0.0;
  double h = 0.0;
};

// Binary logistic loss derivatives at log-odds f for a {1,0} label.
GradHess logistic_grad_hess(int y01, double f);

// Closed-form regularized leaf weight -eta * G / (H + lambda); 0 when the
// denominator is 0.
double leaf_score(double g_sum, double h_sum, double lambda, double eta);

struct SplitCandidate {
  int feature = 0;
  double threshold = 0.0;
  bool default_left = true;
  double gain = 0.0;
};

// Exact greedy split search. Every midpoint between consecutive distinct
// non-missing values is scored twice (missing rows routed left and right)
// and the better routing becomes the candidate's default direction. Returns
// the best candidate with positive gain whose children both satisfy
// min_child_weight, or nullopt. Ties in gain (within 1e-12) break toward the
// lowest feature, then threshold, then default-left.
std::optional<SplitCandidate> find_best_split(std::span<const FeatureSnapshot> data,
                                              std::span<const int> rows,
                                              std::span<const double> grad,
                                              std::span<const double> hess,
                                              const GbtParams& params,
                                              std::span<const int> allowed_features);

GbtModel fit(std::span<const FeatureSnapshot> train, const GbtParams& params);

double predict_margin(const GbtModel& model, const FeatureSnapshot& x);
double predict_proba(const GbtModel& model, const FeatureSnapshot& x);

// ---------------------------------------------------------------------------
// Random hyperparameter search
// ---------------------------------------------------------------------------

struct GbtSearchSpace {
  int num_trees = 16;
  std::pair<int, int> max_depth{2, 5};
  std::pair<double, double> learning_rate{0.05, 1.0};
  std::pair<double, double> lambda{0.0, 10.0};
  std::pair<double, double> gamma{0.0, 5.0};
  std::pair<double, double> min_child_weight{0.0, 10.0};
  std::pair<double, double> colsample{0.5, 1.0};
};

struct SearchTrial {
  GbtParams params;
  std::vector<double> fold_aurocs;
  double mean_auroc = 0.0;
};

struct SearchResult {
  GbtParams best;
  int best_index = 0;
  std::vector<SearchTrial> trials;
};

// Samples `trials` parameter vectors uniformly from the space and scores
// each by patient-disjoint k-fold cross-validated AUROC on shared folds.
// Deterministic given the seed; ties keep the earliest trial.
SearchResult random_search(std::span<const FeatureSnapshot> train,
                           const GbtSearchSpace& space, int folds, int trials,
                           std::uint64_t seed);

nlohmann::json to_json(const GbtModel& model);
GbtModel model_from_json(const nlohmann::json& j);

}  // namespace wardboost::gbt
