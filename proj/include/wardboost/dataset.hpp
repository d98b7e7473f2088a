#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wardboost/time.hpp"

namespace wardboost {

// ---------------------------------------------------------------------------
// Vitals and feature layout
// ---------------------------------------------------------------------------

enum class Vital : int { HR = 0, O2, RR, Temp, DBP, SBP };

inline constexpr int kVitalCount = 6;

const char* vital_name(Vital v);
std::optional<Vital> parse_vital(std::string_view name);

// Fixed feature order shared by every model: the six vitals, age, and the
// three derived measures.
inline constexpr int kFeatureCount = 10;
enum FeatureIndex : int {
  kFeatHR = 0,
  kFeatO2,
  kFeatRR,
  kFeatTemp,
  kFeatDBP,
  kFeatSBP,
  kFeatAge,
  kFeatPulsePressure,
  kFeatMAP,
  kFeatShockIndex,
};

const char* feature_name(int feature);

inline constexpr double kMinAgeYears = 1.0 / 12.0;
inline constexpr double kMaxAgeYears = 20.0;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct VitalEvent {
  std::string encounter_id;
  std::string patient_id;
  Timestamp time = 0;
  Vital vital = Vital::HR;
  double value = 0.0;
};

struct Encounter {
  std::string encounter_id;
  std::string patient_id;
  double age_years = 0.0;
  bool transferred = false;
  std::optional<Timestamp> transfer_time;
  std::vector<VitalEvent> events;  // sorted by time
};

// One training/prediction instance. A feature slot is empty when the value
// was never observed; age is always present.
struct FeatureSnapshot {
  std::array<std::optional<double>, kFeatureCount> values{};
  int label = 0;  // +1 transfer, -1 no-transfer, 0 unlabeled
  std::string encounter_id;
  std::string patient_id;

  double age() const { return *values[kFeatAge]; }
};

// Half-open, contiguous age intervals covering [0, 20). The default layout
// uses 3-month bins under one year and 1.5-year bins after, the last one
// truncated at 20 years (17 bins).
class AgeBins {
 public:
  explicit AgeBins(std::vector<double> edges);
  static AgeBins defaults();

  // Index i with edges[i] <= age < edges[i+1]; throws std::out_of_range
  // outside [0, 20).
  int index_of(double age) const;
  std::optional<int> try_index(double age) const noexcept;

  int count() const { return static_cast<int>(edges_.size()) - 1; }
  std::pair<double, double> bin(int i) const { return {edges_[i], edges_[i + 1]}; }
  const std::vector<double>& edges() const { return edges_; }

  bool operator==(const AgeBins&) const = default;

 private:
  std::vector<double> edges_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Builds an unlabeled snapshot from raw vitals, filling in pulse pressure,
// approximate MAP and shock index where their inputs are present.
FeatureSnapshot derive_features(std::optional<double> hr, std::optional<double> o2,
                                std::optional<double> rr, std::optional<double> temp,
                                std::optional<double> dbp, std::optional<double> sbp,
                                double age_years);

// Last recorded value of each vital within [window_end - window_hours,
// window_end]. Vitals with no event in the window stay missing.
FeatureSnapshot extract_snapshot(const Encounter& encounter, Timestamp window_end,
                                 double window_hours = 6.0);

struct CohortOptions {
  double window_hours = 6.0;
  double lead_hours = 2.0;   // positive window ends this long before transfer
  bool age_matched = false;  // prefer negatives from the positive's age bin
};

// One positive snapshot per transferred encounter plus an equal number of
// negatives sampled without replacement from the non-transferred encounters,
// each over a random window inside its event span.
std::vector<FeatureSnapshot> build_cohort(std::span<const Encounter> encounters,
                                          std::uint64_t seed,
                                          const CohortOptions& options = {});

struct TrainTestSplit {
  std::vector<FeatureSnapshot> train;
  std::vector<FeatureSnapshot> test;
};

// Stratified, patient-disjoint split. Whole patients are assigned to the
// test side until the per-class targets are met; everything else trains.
TrainTestSplit split_train_test(std::span<const FeatureSnapshot> cohort,
                                double test_fraction, std::uint64_t seed);

struct FoldSplit {
  std::vector<FeatureSnapshot> train;
  std::vector<FeatureSnapshot> validation;
};

// Patient-disjoint k-fold partition; fold sizes differ by at most the
// largest per-patient group.
std::vector<FoldSplit> kfold(std::span<const FeatureSnapshot> cohort, int k,
                             std::uint64_t seed);

}  // namespace wardboost
