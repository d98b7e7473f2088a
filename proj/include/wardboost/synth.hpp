#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "wardboost/dataset.hpp"

namespace wardboost::synth {

struct VitalStats {
  double mean = 0.0;
  double sd = 1.0;
};

struct AgeBandVitals {
  double lo_years = 0.0;
  double hi_years = 0.0;
  std::array<VitalStats, kVitalCount> vitals;  // indexed by Vital
};

// All distributional knobs are configuration so signal strength is an
// explicit dial; the defaults use pediatric normal ranges per age band.
struct SynthConfig {
  int n_encounters = 1000;
  double transfer_prevalence = 0.026;
  std::uint64_t seed = 0;

  std::vector<AgeBandVitals> age_bands;

  // Drift added to each vital by transfer time, in SDs of that vital's
  // band. Ramps linearly over the final drift_hours of the stay.
  std::array<double, kVitalCount> effect_sizes{};
  double drift_hours = 12.0;

  // Event arrival rates, per vital per hour. Kept high enough that a
  // six-hour window rarely misses a monitored vital for either class.
  double events_per_hour = 1.0;
  double transfer_rate_multiplier = 2.0;

  // Probability that a vital is never measured during an encounter.
  std::array<double, kVitalCount> missing_prob{};

  // Baseline spread across patients and measurement noise within a stay,
  // as fractions of the band SD.
  double baseline_sd_frac = 0.8;
  double noise_sd_frac = 0.35;

  double min_stay_hours = 6.0;
  double max_stay_hours = 72.0;
  double min_transfer_stay_hours = 10.0;
  double readmit_prob = 0.04;

  // Values are clipped into these physiological ranges.
  std::array<std::pair<double, double>, kVitalCount> hard_bounds;
};

SynthConfig default_config();

// Throws std::invalid_argument naming the offending field.
void validate(const SynthConfig& config);

// Deterministic given the seed. Transferred encounters (exactly
// round(n * prevalence) of them) drift their vitals toward deterioration
// ahead of transfer_time and are sampled at a higher rate.
std::vector<Encounter> generate(const SynthConfig& config);

}  // namespace wardboost::synth
