#include "wardboost/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "wardboost/metrics.hpp"
#include "wardboost/rng.hpp"

namespace wardboost::gbt {

namespace {

constexpr double kGainTie = 1e-12;

double structure_score(double g_sum, double h_sum, double lambda) {
  const double den = h_sum + lambda;
  return den > 0.0 ? g_sum * g_sum / den : 0.0;
}

bool better(const SplitCandidate& a, const SplitCandidate& b) {
  if (a.gain > b.gain + kGainTie) return true;
  if (a.gain < b.gain - kGainTie) return false;
  const auto key = [](const SplitCandidate& c) {
    return std::make_tuple(c.feature, c.threshold, c.default_left ? 0 : 1);
  };
  return key(a) < key(b);
}

}  // namespace

void validate(const GbtParams& params) {
  if (params.num_trees < 0) throw std::invalid_argument("num_trees must be >= 0");
  if (params.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(params.learning_rate > 0.0) || params.learning_rate > 1.0) {
    throw std::invalid_argument("learning_rate must be in (0, 1]");
  }
  if (!(params.lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  if (!(params.gamma >= 0.0)) throw std::invalid_argument("gamma must be >= 0");
  if (!(params.min_child_weight >= 0.0)) {
    throw std::invalid_argument("min_child_weight must be >= 0");
  }
  if (!(params.colsample > 0.0) || params.colsample > 1.0) {
    throw std::invalid_argument("colsample must be in (0, 1]");
  }
}

GradHess logistic_grad_hess(int y01, double f) {
  const double p = 1.0 / (1.0 + std::exp(-f));
  return {p - static_cast<double>(y01), p * (1.0 - p)};
}

double leaf_score(double g_sum, double h_sum, double lambda, double eta) {
  const double den = h_sum + lambda;
  if (den == 0.0) return 0.0;
  return -eta * g_sum / den;
}

std::optional<SplitCandidate> find_best_split(std::span<const FeatureSnapshot> data,
                                              std::span<const int> rows,
                                              std::span<const double> grad,
                                              std::span<const double> hess,
                                              const GbtParams& params,
                                              std::span<const int> allowed_features) {
  if (rows.empty()) return std::nullopt;

  double g_total = 0.0, h_total = 0.0;
  for (const int r : rows) {
    g_total += grad[r];
    h_total += hess[r];
  }
  const double parent = structure_score(g_total, h_total, params.lambda);

  std::optional<SplitCandidate> best;
  std::vector<std::tuple<double, double, double>> present;  // value, g, h
  present.reserve(rows.size());

  for (const int feature : allowed_features) {
    present.clear();
    double g_missing = 0.0, h_missing = 0.0;
    for (const int r : rows) {
      const auto& v = data[r].values[feature];
      if (v) {
        present.emplace_back(*v, grad[r], hess[r]);
      } else {
        g_missing += grad[r];
        h_missing += hess[r];
      }
    }
    if (present.size() < 2) continue;
    std::sort(present.begin(), present.end(),
              [](const auto& a, const auto& b) { return std::get<0>(a) < std::get<0>(b); });

    double g_left = 0.0, h_left = 0.0;
    for (std::size_t i = 0; i + 1 < present.size();) {
      const double v = std::get<0>(present[i]);
      while (i < present.size() && std::get<0>(present[i]) == v) {
        g_left += std::get<1>(present[i]);
        h_left += std::get<2>(present[i]);
        ++i;
      }
      if (i >= present.size()) break;
      const double threshold = 0.5 * (v + std::get<0>(present[i]));

      // Score both routings of the missing rows; the better one becomes the
      // candidate's default direction (ties go left).
      for (const bool missing_left : {true, false}) {
        const double gl = g_left + (missing_left ? g_missing : 0.0);
        const double hl = h_left + (missing_left ? h_missing : 0.0);
        const double gr = g_total - gl;
        const double hr = h_total - hl;
        if (hl < params.min_child_weight || hr < params.min_child_weight) continue;
        SplitCandidate cand;
        cand.feature = feature;
        cand.threshold = threshold;
        cand.default_left = missing_left;
        cand.gain = 0.5 * (structure_score(gl, hl, params.lambda) +
                           structure_score(gr, hr, params.lambda) - parent) -
                    params.gamma;
        if (cand.gain > 0.0 && (!best || better(cand, *best))) best = cand;
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct TreeBuilder {
  std::span<const FeatureSnapshot> data;
  const GbtParams& params;
  std::span<const double> grad;
  std::span<const double> hess;
  std::span<const int> features;
  Tree& tree;
  std::vector<double>& scores;

  int build(std::vector<int>& rows, int depth) {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::optional<SplitCandidate> split;
    if (depth < params.max_depth) {
      split = find_best_split(data, rows, grad, hess, params, features);
    }
    if (!split) {
      double g_sum = 0.0, h_sum = 0.0;
      for (const int r : rows) {
        g_sum += grad[r];
        h_sum += hess[r];
      }
      const double value = leaf_score(g_sum, h_sum, params.lambda, params.learning_rate);
      tree.nodes[idx].is_leaf = true;
      tree.nodes[idx].leaf_value = value;
      for (const int r : rows) scores[r] += value;
      return idx;
    }

    std::vector<int> left_rows, right_rows;
    left_rows.reserve(rows.size());
    right_rows.reserve(rows.size());
    for (const int r : rows) {
      const auto& v = data[r].values[split->feature];
      const bool go_left = v ? (*v < split->threshold) : split->default_left;
      (go_left ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    tree.nodes[idx].is_leaf = false;
    tree.nodes[idx].feature = split->feature;
    tree.nodes[idx].threshold = split->threshold;
    tree.nodes[idx].default_left = split->default_left;
    const int left = build(left_rows, depth + 1);
    const int right = build(right_rows, depth + 1);
    tree.nodes[idx].left = left;
    tree.nodes[idx].right = right;
    return idx;
  }
};

std::vector<int> sample_features(double colsample, std::uint64_t seed) {
  const int total = kFeatureCount;
  int count = static_cast<int>(std::llround(colsample * total));
  count = std::clamp(count, 1, total);
  std::vector<int> features(total);
  for (int i = 0; i < total; ++i) features[i] = i;
  if (count == total) return features;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(total - i)));
    std::swap(features[i], features[j]);
  }
  features.resize(count);
  std::sort(features.begin(), features.end());
  return features;
}

}  // namespace

double Tree::predict(const FeatureSnapshot& x) const {
  int idx = 0;
  while (!nodes[idx].is_leaf) {
    const TreeNode& node = nodes[idx];
    const auto& v = x.values[node.feature];
    const bool go_left = v ? (*v < node.threshold) : node.default_left;
    idx = go_left ? node.left : node.right;
  }
  return nodes[idx].leaf_value;
}

GbtModel fit(std::span<const FeatureSnapshot> train, const GbtParams& params) {
  validate(params);
  if (train.empty()) throw std::runtime_error("empty training set");
  std::size_t n_pos = 0;
  for (const auto& x : train) {
    if (x.label > 0) ++n_pos;
  }
  if (n_pos == 0 || n_pos == train.size()) {
    throw std::runtime_error("training set must contain both classes");
  }

  GbtModel model;
  model.params = params;
  const double rate = static_cast<double>(n_pos) / static_cast<double>(train.size());
  model.base_score = std::log(rate / (1.0 - rate));

  const std::size_t n = train.size();
  std::vector<double> scores(n, model.base_score);
  std::vector<double> grad(n), hess(n);

  for (int k = 0; k < params.num_trees; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto gh = logistic_grad_hess(train[i].label > 0 ? 1 : 0, scores[i]);
      grad[i] = gh.g;
      hess[i] = gh.h;
    }
    const auto features = sample_features(params.colsample, derive_seed(params.seed, k));
    Tree tree;
    std::vector<int> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
    TreeBuilder builder{train, params, grad, hess, features, tree, scores};
    builder.build(rows, 0);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

double predict_margin(const GbtModel& model, const FeatureSnapshot& x) {
  double f = model.base_score;
  for (const auto& tree : model.trees) f += tree.predict(x);
  return f;
}

double predict_proba(const GbtModel& model, const FeatureSnapshot& x) {
  return 1.0 / (1.0 + std::exp(-predict_margin(model, x)));
}

// ---------------------------------------------------------------------------
// Random search
// ---------------------------------------------------------------------------

SearchResult random_search(std::span<const FeatureSnapshot> train, const GbtSearchSpace& space,
                           int folds, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("random_search requires trials >= 1");
  if (folds < 2) throw std::invalid_argument("random_search requires folds >= 2");

  // All trials are scored on the same patient-disjoint folds.
  const std::uint64_t fold_seed = derive_seed(seed, 0xF01D5);

  SearchResult result;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, 1 + t));
    GbtParams params;
    params.num_trees = space.num_trees;
    params.max_depth = rng.uniform_int(space.max_depth.first, space.max_depth.second);
    params.learning_rate = rng.uniform(space.learning_rate.first, space.learning_rate.second);
    params.lambda = rng.uniform(space.lambda.first, space.lambda.second);
    params.gamma = rng.uniform(space.gamma.first, space.gamma.second);
    params.min_child_weight =
        rng.uniform(space.min_child_weight.first, space.min_child_weight.second);
    params.colsample = rng.uniform(space.colsample.first, space.colsample.second);
    params.seed = derive_seed(seed, 0x7000 + t);
    validate(params);

    const metrics::Trainer trainer = [&params](std::span<const FeatureSnapshot> fold_train) {
      auto model = std::make_shared<GbtModel>(fit(fold_train, params));
      return [model](const FeatureSnapshot& x) { return predict_proba(*model, x); };
    };
    const auto cv = metrics::cross_validate(trainer, train, folds, fold_seed);
    result.trials.push_back({params, cv.fold_aurocs, cv.mean_auroc});
  }

  result.best_index = 0;
  for (int t = 1; t < trials; ++t) {
    if (result.trials[t].mean_auroc > result.trials[result.best_index].mean_auroc) {
      result.best_index = t;
    }
  }
  result.best = result.trials[result.best_index].params;
  return result;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::json node_to_json(const Tree& tree, int idx) {
  const TreeNode& node = tree.nodes[idx];
  if (node.is_leaf) {
    return {{"leaf", node.leaf_value}};
  }
  return {{"feature", node.feature},
          {"threshold", node.threshold},
          {"default", node.default_left ? "left" : "right"},
          {"left", node_to_json(tree, node.left)},
          {"right", node_to_json(tree, node.right)}};
}

int node_from_json(const nlohmann::json& j, Tree& tree) {
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  if (j.contains("leaf")) {
    tree.nodes[idx].is_leaf = true;
    tree.nodes[idx].leaf_value = j.at("leaf").get<double>();
    if (!std::isfinite(tree.nodes[idx].leaf_value)) {
      throw std::invalid_argument("leaf value is not finite");
    }
    return idx;
  }
  TreeNode node;
  node.is_leaf = false;
  node.feature = j.at("feature").get<int>();
  node.threshold = j.at("threshold").get<double>();
  const std::string dir = j.at("default").get<std::string>();
  if (dir != "left" && dir != "right") {
    throw std::invalid_argument("node default must be 'left' or 'right'");
  }
  node.default_left = dir == "left";
  if (node.feature < 0 || node.feature >= kFeatureCount || !std::isfinite(node.threshold)) {
    throw std::invalid_argument("invalid split node");
  }
  tree.nodes[idx] = node;
  const int left = node_from_json(j.at("left"), tree);
  const int right = node_from_json(j.at("right"), tree);
  tree.nodes[idx].left = left;
  tree.nodes[idx].right = right;
  return idx;
}

nlohmann::json params_to_json(const GbtParams& p) {
  return {{"num_trees", p.num_trees},
          {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate},
          {"lambda", p.lambda},
          {"gamma", p.gamma},
          {"min_child_weight", p.min_child_weight},
          {"colsample", p.colsample},
          {"seed", p.seed}};
}

GbtParams params_from_json(const nlohmann::json& j) {
  GbtParams p;
  p.num_trees = j.at("num_trees").get<int>();
  p.max_depth = j.at("max_depth").get<int>();
  p.learning_rate = j.at("learning_rate").get<double>();
  p.lambda = j.at("lambda").get<double>();
  p.gamma = j.at("gamma").get<double>();
  p.min_child_weight = j.at("min_child_weight").get<double>();
  p.colsample = j.at("colsample").get<double>();
  p.seed = j.at("seed").get<std::uint64_t>();
  validate(p);
  return p;
}

}  // namespace

nlohmann::json to_json(const GbtModel& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : model.trees) {
    trees.push_back(node_to_json(tree, 0));
  }
  return {{"version", 1},
          {"base_score", model.base_score},
          {"params", params_to_json(model.params)},
          {"trees", std::move(trees)}};
}

GbtModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("version", 0) != 1) {
    throw std::invalid_argument("unsupported gbt model document");
  }
  GbtModel model;
  model.base_score = j.at("base_score").get<double>();
  if (!std::isfinite(model.base_score)) throw std::invalid_argument("base_score not finite");
  model.params = params_from_json(j.at("params"));
  for (const auto& t : j.at("trees")) {
    Tree tree;
    node_from_json(t, tree);
    model.trees.push_back(std::move(tree));
  }
  return model;
}

}  // namespace wardboost::gbt
