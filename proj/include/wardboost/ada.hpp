#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "wardboost/dataset.hpp"

namespace wardboost::ada {

// Age-bin marker for stumps that are not restricted to one age group
// (used by stumps that threshold the age feature itself).
inline constexpr int kAllAges = -1;

// Depth-1 threshold classifier. Votes +1 when the feature value is >= the
// threshold (polarity +1; polarity -1 flips the sides) and abstains when the
// feature is missing or the instance's age falls outside the stump's bin.
struct Stump {
  int feature = 0;
  int age_bin = kAllAges;
  double threshold = 0.0;
  int polarity = +1;
};

struct WeightedStump {
  Stump stump;
  double alpha = 0.0;
};

struct AdaModel {
  std::vector<WeightedStump> stumps;
  AgeBins bins = AgeBins::defaults();
  int rounds = 0;  // requested rounds; stumps.size() <= rounds on early stop
};

// {+1, -1, 0}; 0 means abstention.
int stump_vote(const Stump& stump, const FeatureSnapshot& x, const AgeBins& bins);

struct StumpFit {
  Stump stump;
  double z = 0.0;      // W0 + 2*sqrt(W+ * W-)
  double alpha = 0.0;  // 0.5 * ln((W+ + eps) / (W- + eps)), eps = 1/(2n)
};

// Exhaustive search over (feature, age bin, threshold, polarity). Candidate
// thresholds for a scope are the lowest distinct value plus the midpoints
// between consecutive distinct values, so a stump may also vote one way on
// every in-scope instance. Only candidates with W+ > W- qualify; nullopt
// means no stump improves on random voting. Ties in Z (within 1e-12) break
// toward the lowest feature, then bin, then threshold, then polarity +1.
std::optional<StumpFit> best_stump(std::span<const FeatureSnapshot> data,
                                   std::span<const double> weights,
                                   const AgeBins& bins);

// Boosts abstaining stumps for up to `rounds` rounds, reweighting by
// exp(-alpha * y * h(x)) each round. Stops early once no stump has W+ > W-.
AdaModel fit(std::span<const FeatureSnapshot> train, int rounds, const AgeBins& bins,
             std::uint64_t seed);

// Sum of alpha-weighted votes; abstentions contribute nothing.
double predict_margin(const AdaModel& model, const FeatureSnapshot& x);

// sigma(2 * margin), strictly increasing in the margin.
double predict_proba(const AdaModel& model, const FeatureSnapshot& x);

nlohmann::json to_json(const AdaModel& model);
AdaModel model_from_json(const nlohmann::json& j);

}  // namespace wardboost::ada
