#include "wardboost/ada.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

namespace wardboost::ada {

namespace {

// Z comparisons tie within this band and fall back to the lexicographic
// order (feature, bin, threshold, polarity), keeping the selected stump
// stable across summation orders.
constexpr double kZTie = 1e-12;

bool better(const StumpFit& a, const StumpFit& b) {
  if (a.z < b.z - kZTie) return true;
  if (a.z > b.z + kZTie) return false;
  const auto key = [](const Stump& s) {
    return std::make_tuple(s.feature, s.age_bin, s.threshold, s.polarity == +1 ? 0 : 1);
  };
  return key(a.stump) < key(b.stump);
}

struct ScopeEntry {
  double value;
  std::size_t row;
};

// One searchable (feature, age bin) pair with its in-scope rows presorted
// by value. The age feature gets a single unrestricted scope.
struct Scope {
  int feature;
  int age_bin;
  std::vector<ScopeEntry> sorted;
};

std::vector<Scope> build_scopes(std::span<const FeatureSnapshot> data, const AgeBins& bins) {
  std::vector<Scope> scopes;
  for (int f = 0; f < kFeatureCount; ++f) {
    if (f == kFeatAge) {
      Scope scope{f, kAllAges, {}};
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].values[kFeatAge]) scope.sorted.push_back({data[i].age(), i});
      }
      if (!scope.sorted.empty()) scopes.push_back(std::move(scope));
      continue;
    }
    std::vector<Scope> per_bin(bins.count());
    for (int b = 0; b < bins.count(); ++b) per_bin[b] = Scope{f, b, {}};
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& v = data[i].values[f];
      if (!v || !data[i].values[kFeatAge]) continue;
      const auto bin = bins.try_index(data[i].age());
      if (!bin) continue;
      per_bin[*bin].sorted.push_back({*v, i});
    }
    for (auto& scope : per_bin) {
      if (!scope.sorted.empty()) scopes.push_back(std::move(scope));
    }
  }
  for (auto& scope : scopes) {
    std::sort(scope.sorted.begin(), scope.sorted.end(),
              [](const ScopeEntry& a, const ScopeEntry& b) { return a.value < b.value; });
  }
  return scopes;
}

// Sweeps one scope's candidate thresholds, updating `best`. Candidates are
// the lowest value (everything votes one way) and the midpoints between
// consecutive distinct values. Above-threshold totals come from suffix sums
// rather than running subtraction so that empty sides are exactly zero;
// otherwise residues get amplified through the sqrt in Z.
void sweep_scope(const Scope& scope, std::span<const FeatureSnapshot> data,
                 std::span<const double> weights, double total_weight, double eps,
                 std::optional<StumpFit>& best) {
  const std::size_t m = scope.sorted.size();
  std::vector<double> pos_suffix(m + 1, 0.0), neg_suffix(m + 1, 0.0);
  for (std::size_t i = m; i > 0; --i) {
    const auto& e = scope.sorted[i - 1];
    const double w = weights[e.row];
    const bool pos = data[e.row].label > 0;
    pos_suffix[i - 1] = pos_suffix[i] + (pos ? w : 0.0);
    neg_suffix[i - 1] = neg_suffix[i] + (pos ? 0.0 : w);
  }
  const double w0 = std::max(0.0, total_weight - pos_suffix[0] - neg_suffix[0]);
  double pos_below = 0.0, neg_below = 0.0;

  const auto consider = [&](double threshold, std::size_t boundary) {
    const double pos_above = pos_suffix[boundary];
    const double neg_above = neg_suffix[boundary];
    for (const int polarity : {+1, -1}) {
      const double w_plus = polarity > 0 ? pos_above + neg_below : neg_above + pos_below;
      const double w_minus = polarity > 0 ? neg_above + pos_below : pos_above + neg_below;
      if (!(w_plus > w_minus)) continue;  // would make alpha <= 0
      StumpFit cand;
      cand.stump = Stump{scope.feature, scope.age_bin, threshold, polarity};
      cand.z = w0 + 2.0 * std::sqrt(w_plus * w_minus);
      cand.alpha = 0.5 * std::log((w_plus + eps) / (w_minus + eps));
      if (!best || better(cand, *best)) best = cand;
    }
  };

  consider(scope.sorted.front().value, 0);
  std::size_t i = 0;
  while (i < m) {
    const double v = scope.sorted[i].value;
    std::size_t j = i;
    while (j < m && scope.sorted[j].value == v) {
      const double w = weights[scope.sorted[j].row];
      (data[scope.sorted[j].row].label > 0 ? pos_below : neg_below) += w;
      ++j;
    }
    if (j < m) consider(0.5 * (v + scope.sorted[j].value), j);
    i = j;
  }
}

std::optional<StumpFit> search_scopes(const std::vector<Scope>& scopes,
                                      std::span<const FeatureSnapshot> data,
                                      std::span<const double> weights) {
  double total_weight = 0.0;
  for (const double w : weights) total_weight += w;
  const double eps = 1.0 / (2.0 * static_cast<double>(data.size()));
  std::optional<StumpFit> best;
  for (const auto& scope : scopes) {
    sweep_scope(scope, data, weights, total_weight, eps, best);
  }
  return best;
}

}  // namespace

int stump_vote(const Stump& stump, const FeatureSnapshot& x, const AgeBins& bins) {
  const auto& value = x.values[stump.feature];
  if (!value) return 0;
  if (stump.age_bin != kAllAges) {
    const auto& age = x.values[kFeatAge];
    if (!age) return 0;
    const auto bin = bins.try_index(*age);
    if (!bin || *bin != stump.age_bin) return 0;
  }
  const int side = *value >= stump.threshold ? +1 : -1;
  return stump.polarity * side;
}

std::optional<StumpFit> best_stump(std::span<const FeatureSnapshot> data,
                                   std::span<const double> weights, const AgeBins& bins) {
  if (data.empty()) throw std::invalid_argument("best_stump needs at least one instance");
  if (data.size() != weights.size()) {
    throw std::invalid_argument("weights must match instance count");
  }
  const auto scopes = build_scopes(data, bins);
  if (scopes.empty()) throw std::runtime_error("no candidate thresholds: all features missing");
  return search_scopes(scopes, data, weights);
}

AdaModel fit(std::span<const FeatureSnapshot> train, int rounds, const AgeBins& bins,
             std::uint64_t /*seed*/) {
  if (rounds < 0) throw std::invalid_argument("rounds must be >= 0");
  if (train.empty()) throw std::runtime_error("empty training set");
  bool has_pos = false, has_neg = false;
  for (const auto& x : train) {
    (x.label > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw std::runtime_error("training set must contain both classes");
  }

  AdaModel model;
  model.bins = bins;
  model.rounds = rounds;
  if (rounds == 0) return model;

  const auto scopes = build_scopes(train, bins);
  if (scopes.empty()) throw std::runtime_error("no candidate thresholds: all features missing");

  const std::size_t n = train.size();
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));

  for (int round = 0; round < rounds; ++round) {
    const auto best = search_scopes(scopes, train, weights);
    if (!best) break;  // nothing beats random voting; stop early
    model.stumps.push_back({best->stump, best->alpha});

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const int vote = stump_vote(best->stump, train[i], bins);
      if (vote != 0) {
        weights[i] *= std::exp(-best->alpha * train[i].label * vote);
      }
      sum += weights[i];
    }
    for (double& w : weights) w /= sum;
  }
  return model;
}

double predict_margin(const AdaModel& model, const FeatureSnapshot& x) {
  double margin = 0.0;
  for (const auto& ws : model.stumps) {
    margin += ws.alpha * stump_vote(ws.stump, x, model.bins);
  }
  return margin;
}

double predict_proba(const AdaModel& model, const FeatureSnapshot& x) {
  return 1.0 / (1.0 + std::exp(-2.0 * predict_margin(model, x)));
}

nlohmann::json to_json(const AdaModel& model) {
  nlohmann::json stumps = nlohmann::json::array();
  for (const auto& ws : model.stumps) {
    stumps.push_back({{"feature", ws.stump.feature},
                      {"bin", ws.stump.age_bin},
                      {"threshold", ws.stump.threshold},
                      {"polarity", ws.stump.polarity},
                      {"alpha", ws.alpha}});
  }
  return {{"version", 1},
          {"age_bins", model.bins.edges()},
          {"rounds", model.rounds},
          {"stumps", std::move(stumps)}};
}

AdaModel model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.value("version", 0) != 1) {
    throw std::invalid_argument("unsupported ada model document");
  }
  AdaModel model;
  model.bins = AgeBins(j.at("age_bins").get<std::vector<double>>());
  model.rounds = j.at("rounds").get<int>();
  for (const auto& s : j.at("stumps")) {
    WeightedStump ws;
    ws.stump.feature = s.at("feature").get<int>();
    ws.stump.age_bin = s.at("bin").get<int>();
    ws.stump.threshold = s.at("threshold").get<double>();
    ws.stump.polarity = s.at("polarity").get<int>();
    ws.alpha = s.at("alpha").get<double>();
    if (ws.stump.feature < 0 || ws.stump.feature >= kFeatureCount) {
      throw std::invalid_argument("stump feature index out of range");
    }
    if (ws.stump.age_bin < kAllAges || ws.stump.age_bin >= model.bins.count()) {
      throw std::invalid_argument("stump age bin out of range");
    }
    if (ws.stump.polarity != +1 && ws.stump.polarity != -1) {
      throw std::invalid_argument("stump polarity must be +1 or -1");
    }
    if (!std::isfinite(ws.stump.threshold) || !std::isfinite(ws.alpha) || ws.alpha <= 0.0) {
      throw std::invalid_argument("stump threshold/alpha invalid");
    }
    model.stumps.push_back(ws);
  }
  return model;
}

}  // namespace wardboost::ada
