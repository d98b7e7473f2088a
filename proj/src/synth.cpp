#include "wardboost/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "wardboost/rng.hpp"

namespace wardboost::synth {

namespace {

// 2015-01-01T00:00:00Z; admissions spread over the following 5.5 years.
constexpr Timestamp kEpochBase = 1420070400;
constexpr double kCollectionYears = 5.5;

int band_index(const SynthConfig& config, double age) {
  for (std::size_t b = 0; b < config.age_bands.size(); ++b) {
    if (age >= config.age_bands[b].lo_years && age < config.age_bands[b].hi_years) {
      return static_cast<int>(b);
    }
  }
  return static_cast<int>(config.age_bands.size()) - 1;
}

std::string make_id(const char* prefix, std::size_t n) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%s%06zu", prefix, n);
  return buf;
}

}  // namespace

SynthConfig default_config() {
  SynthConfig config;
  config.age_bands = {
      {0.0, 0.25, {{{140, 15}, {98, 1.5}, {45, 8}, {37.0, 0.5}, {45, 8}, {75, 8}}}},
      {0.25, 1.0, {{{125, 15}, {98, 1.5}, {35, 7}, {37.0, 0.5}, {50, 8}, {85, 9}}}},
      {1.0, 4.0, {{{110, 14}, {98, 1.5}, {26, 5}, {37.0, 0.5}, {55, 9}, {95, 10}}}},
      {4.0, 12.0, {{{90, 12}, {98, 1.5}, {20, 4}, {36.9, 0.5}, {60, 9}, {105, 10}}}},
      {12.0, 20.0, {{{75, 11}, {98, 1.5}, {15, 3}, {36.8, 0.4}, {65, 9}, {115, 11}}}},
  };
  // Deterioration drift in per-band SDs at transfer time: tachycardia,
  // desaturation, tachypnea, fever, hypotension.
  config.effect_sizes = {2.2, -2.0, 2.2, 0.7, -1.2, -1.6};
  config.missing_prob = {0.05, 0.05, 0.05, 0.15, 0.25, 0.25};
  config.hard_bounds = {{{30, 250}, {50, 100}, {2, 120}, {34, 42.5}, {15, 150}, {30, 250}}};
  return config;
}

void validate(const SynthConfig& config) {
  if (config.n_encounters < 1) throw std::invalid_argument("n_encounters must be >= 1");
  if (!(config.transfer_prevalence > 0.0) || !(config.transfer_prevalence < 1.0)) {
    throw std::invalid_argument("transfer_prevalence must be in (0, 1)");
  }
  if (config.age_bands.empty()) throw std::invalid_argument("age_bands must be nonempty");
  for (const auto& band : config.age_bands) {
    if (!(band.lo_years < band.hi_years)) throw std::invalid_argument("age_bands band is empty");
    for (const auto& vs : band.vitals) {
      if (!(vs.sd > 0.0)) throw std::invalid_argument("age_bands vital sd must be > 0");
    }
  }
  if (!(config.events_per_hour > 0.0)) throw std::invalid_argument("events_per_hour must be > 0");
  if (!(config.transfer_rate_multiplier > 0.0)) {
    throw std::invalid_argument("transfer_rate_multiplier must be > 0");
  }
  for (const double p : config.missing_prob) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("missing_prob must be in [0, 1]");
  }
  if (!(config.drift_hours > 0.0)) throw std::invalid_argument("drift_hours must be > 0");
  if (!(config.min_stay_hours > 0.0) || config.max_stay_hours < config.min_stay_hours) {
    throw std::invalid_argument("stay hours range (min_stay_hours/max_stay_hours) is invalid");
  }
  if (config.min_transfer_stay_hours < config.min_stay_hours ||
      config.min_transfer_stay_hours > config.max_stay_hours) {
    throw std::invalid_argument("min_transfer_stay_hours must lie in the stay range");
  }
  if (config.readmit_prob < 0.0 || config.readmit_prob >= 1.0) {
    throw std::invalid_argument("readmit_prob must be in [0, 1)");
  }
  for (const auto& [lo, hi] : config.hard_bounds) {
    if (!(lo < hi)) throw std::invalid_argument("hard_bounds range is empty");
  }
}

std::vector<Encounter> generate(const SynthConfig& config) {
  validate(config);
  const int n = config.n_encounters;
  const long long n_transfer =
      std::llround(config.transfer_prevalence * static_cast<double>(n));

  // Choose which encounters transfer.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng pick_rng(derive_seed(config.seed, 0xA11));
  pick_rng.shuffle(order);
  std::vector<char> is_transfer(n, 0);
  for (long long i = 0; i < n_transfer; ++i) is_transfer[order[i]] = 1;

  Rng patient_rng(derive_seed(config.seed, 0xB0B));
  std::vector<std::pair<std::string, double>> patients;  // id, age

  std::vector<Encounter> encounters;
  encounters.reserve(n);
  for (int i = 0; i < n; ++i) {
    Encounter enc;
    enc.encounter_id = make_id("e", static_cast<std::size_t>(i));

    // Mostly fresh patients with an occasional readmission.
    if (!patients.empty() && patient_rng.bernoulli(config.readmit_prob)) {
      const auto& [pid, age] = patients[patient_rng.below(patients.size())];
      enc.patient_id = pid;
      enc.age_years = age;
    } else {
      enc.patient_id = make_id("p", patients.size());
      enc.age_years = patient_rng.uniform(kMinAgeYears, kMaxAgeYears);
      patients.emplace_back(enc.patient_id, enc.age_years);
    }

    Rng rng(derive_seed(config.seed, 0x1000 + static_cast<std::uint64_t>(i)));
    const Timestamp admit =
        kEpochBase +
        static_cast<Timestamp>(rng.uniform() * kCollectionYears * 365.25 * 24 * 3600);
    enc.transferred = is_transfer[i] != 0;
    const double stay_hours =
        enc.transferred
            ? rng.uniform(config.min_transfer_stay_hours, config.max_stay_hours)
            : rng.uniform(config.min_stay_hours, config.max_stay_hours);
    const Timestamp stay_end = admit + hours_to_seconds(stay_hours);
    if (enc.transferred) enc.transfer_time = stay_end;

    const int band = band_index(config, enc.age_years);
    const auto& vitals = config.age_bands[band].vitals;
    const double rate_per_hour =
        config.events_per_hour * (enc.transferred ? config.transfer_rate_multiplier : 1.0);

    std::array<bool, kVitalCount> keep{};
    bool any = false;
    for (int v = 0; v < kVitalCount; ++v) {
      keep[v] = !rng.bernoulli(config.missing_prob[v]);
      any = any || keep[v];
    }
    if (!any) keep[static_cast<int>(Vital::HR)] = true;  // never a fully silent stay

    const Timestamp drift_start = stay_end - hours_to_seconds(config.drift_hours);
    for (int v = 0; v < kVitalCount; ++v) {
      if (!keep[v]) continue;
      const VitalStats& stats = vitals[v];
      const double baseline = stats.mean + config.baseline_sd_frac * stats.sd * rng.normal();
      double t_hours = 0.0;  // admission vitals first, then a Poisson stream
      while (true) {
        const Timestamp t = admit + hours_to_seconds(t_hours);
        if (t > stay_end) break;
        double value = baseline + config.noise_sd_frac * stats.sd * rng.normal();
        if (enc.transferred && t > drift_start) {
          const double ramp = static_cast<double>(t - drift_start) /
                              static_cast<double>(stay_end - drift_start);
          value += ramp * config.effect_sizes[v] * stats.sd;
        }
        value = std::clamp(value, config.hard_bounds[v].first, config.hard_bounds[v].second);
        enc.events.push_back(
            {enc.encounter_id, enc.patient_id, t, static_cast<Vital>(v), value});
        t_hours += -std::log(1.0 - rng.uniform()) / rate_per_hour;
      }
    }
    std::stable_sort(enc.events.begin(), enc.events.end(),
                     [](const VitalEvent& a, const VitalEvent& b) { return a.time < b.time; });
    encounters.push_back(std::move(enc));
  }
  return encounters;
}

}  // namespace wardboost::synth
