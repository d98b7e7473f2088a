#include "wardboost/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "wardboost/rng.hpp"

namespace wardboost {

namespace {

const char* const kVitalNames[kVitalCount] = {"HR", "O2", "RR", "Temp", "dBP", "sBP"};
const char* const kFeatureNames[kFeatureCount] = {"hr",  "o2",  "rr",  "temp", "dbp",
                                                  "sbp", "age", "pp",  "map",  "si"};

void check_finite(const std::optional<double>& v, const char* name) {
  if (v && !std::isfinite(*v)) {
    throw std::invalid_argument(std::string(name) + " value is not finite");
  }
}

}  // namespace

const char* vital_name(Vital v) { return kVitalNames[static_cast<int>(v)]; }

std::optional<Vital> parse_vital(std::string_view name) {
  for (int i = 0; i < kVitalCount; ++i) {
    if (name == kVitalNames[i]) return static_cast<Vital>(i);
  }
  return std::nullopt;
}

const char* feature_name(int feature) { return kFeatureNames[feature]; }

// ---------------------------------------------------------------------------
// AgeBins
// ---------------------------------------------------------------------------

AgeBins::AgeBins(std::vector<double> edges) : edges_(std::move(edges)) {
  if (edges_.size() < 2) throw std::invalid_argument("age bins need at least two edges");
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (!(edges_[i - 1] < edges_[i])) {
      throw std::invalid_argument("age bin edges must be strictly increasing");
    }
  }
}

AgeBins AgeBins::defaults() {
  std::vector<double> edges{0.0, 0.25, 0.5, 0.75};
  for (double e = 1.0; e < kMaxAgeYears; e += 1.5) edges.push_back(e);
  edges.push_back(kMaxAgeYears);  // final bin truncated at 20
  return AgeBins(std::move(edges));
}

int AgeBins::index_of(double age) const {
  const auto idx = try_index(age);
  if (!idx) throw std::out_of_range("age " + std::to_string(age) + " outside binned range");
  return *idx;
}

std::optional<int> AgeBins::try_index(double age) const noexcept {
  if (!(age >= edges_.front()) || !(age < edges_.back())) return std::nullopt;
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), age);
  return static_cast<int>(it - edges_.begin()) - 1;
}

// ---------------------------------------------------------------------------
// Snapshot construction
// ---------------------------------------------------------------------------

FeatureSnapshot derive_features(std::optional<double> hr, std::optional<double> o2,
                                std::optional<double> rr, std::optional<double> temp,
                                std::optional<double> dbp, std::optional<double> sbp,
                                double age_years) {
  check_finite(hr, "hr");
  check_finite(o2, "o2");
  check_finite(rr, "rr");
  check_finite(temp, "temp");
  check_finite(dbp, "dbp");
  check_finite(sbp, "sbp");
  if (!std::isfinite(age_years)) throw std::invalid_argument("age value is not finite");
  if (age_years < kMinAgeYears || age_years >= kMaxAgeYears) {
    throw std::out_of_range("age " + std::to_string(age_years) +
                            " outside cohort range [1/12, 20)");
  }

  FeatureSnapshot snap;
  snap.values[kFeatHR] = hr;
  snap.values[kFeatO2] = o2;
  snap.values[kFeatRR] = rr;
  snap.values[kFeatTemp] = temp;
  snap.values[kFeatDBP] = dbp;
  snap.values[kFeatSBP] = sbp;
  snap.values[kFeatAge] = age_years;
  if (dbp && sbp) {
    snap.values[kFeatPulsePressure] = *sbp - *dbp;
    snap.values[kFeatMAP] = (2.0 / 3.0) * *dbp + (1.0 / 3.0) * *sbp;
  }
  if (hr && sbp && *sbp != 0.0) {
    snap.values[kFeatShockIndex] = *hr / *sbp;
  }
  return snap;
}

FeatureSnapshot extract_snapshot(const Encounter& encounter, Timestamp window_end,
                                 double window_hours) {
  const Timestamp window_start = window_end - hours_to_seconds(window_hours);
  std::array<std::optional<double>, kVitalCount> last{};
  int found = 0;
  // Events are sorted by time; walk backwards and keep the first hit per vital.
  for (auto it = encounter.events.rbegin(); it != encounter.events.rend(); ++it) {
    if (it->time > window_end) continue;
    if (it->time < window_start) break;
    auto& slot = last[static_cast<int>(it->vital)];
    if (!slot) {
      slot = it->value;
      if (++found == kVitalCount) break;
    }
  }
  FeatureSnapshot snap = derive_features(last[0], last[1], last[2], last[3], last[4], last[5],
                                         encounter.age_years);
  snap.encounter_id = encounter.encounter_id;
  snap.patient_id = encounter.patient_id;
  return snap;
}

// ---------------------------------------------------------------------------
// Cohort construction
// ---------------------------------------------------------------------------

std::vector<FeatureSnapshot> build_cohort(std::span<const Encounter> encounters,
                                          std::uint64_t seed, const CohortOptions& options) {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;  // non-transferred with at least one event
  for (std::size_t i = 0; i < encounters.size(); ++i) {
    const Encounter& e = encounters[i];
    if (e.transferred) {
      if (!e.transfer_time) {
        throw std::runtime_error("encounter " + e.encounter_id +
                                 " is transferred but has no transfer_time");
      }
      positives.push_back(i);
    } else if (!e.events.empty()) {
      negatives.push_back(i);
    }
  }
  if (positives.empty()) throw std::runtime_error("cohort has no transferred encounters");
  if (negatives.size() < positives.size()) {
    throw std::runtime_error("not enough non-transferred encounters to match " +
                             std::to_string(positives.size()) + " transfers");
  }

  const AgeBins bins = AgeBins::defaults();
  Rng rng(derive_seed(seed, 0));
  rng.shuffle(negatives);

  // Pick the matched negatives: uniform without replacement, optionally
  // preferring encounters from the positive's age bin.
  std::vector<std::size_t> chosen;
  chosen.reserve(positives.size());
  if (options.age_matched) {
    std::vector<bool> used(negatives.size(), false);
    for (const std::size_t pos_idx : positives) {
      const auto want = bins.try_index(encounters[pos_idx].age_years);
      std::size_t pick = negatives.size();
      for (std::size_t j = 0; j < negatives.size(); ++j) {
        if (used[j]) continue;
        if (want && bins.try_index(encounters[negatives[j]].age_years) == want) {
          pick = j;
          break;
        }
        if (pick == negatives.size()) pick = j;  // fallback: first unused
      }
      used[pick] = true;
      chosen.push_back(negatives[pick]);
    }
  } else {
    chosen.assign(negatives.begin(), negatives.begin() + positives.size());
  }

  std::vector<FeatureSnapshot> cohort;
  cohort.reserve(2 * positives.size());
  for (const std::size_t i : positives) {
    const Encounter& e = encounters[i];
    const Timestamp window_end = *e.transfer_time - hours_to_seconds(options.lead_hours);
    FeatureSnapshot snap = extract_snapshot(e, window_end, options.window_hours);
    snap.label = +1;
    cohort.push_back(std::move(snap));
  }
  const Timestamp window_len = hours_to_seconds(options.window_hours);
  for (const std::size_t i : chosen) {
    const Encounter& e = encounters[i];
    const Timestamp first = e.events.front().time;
    const Timestamp last = e.events.back().time;
    Rng enc_rng(derive_seed(seed, 1 + i));
    Timestamp window_end;
    if (last - first <= window_len) {
      window_end = last;  // stay shorter than the window: use the whole span
    } else {
      const Timestamp start =
          first + static_cast<Timestamp>(enc_rng.uniform() * static_cast<double>(last - first - window_len));
      window_end = start + window_len;
    }
    FeatureSnapshot snap = extract_snapshot(e, window_end, options.window_hours);
    snap.label = -1;
    cohort.push_back(std::move(snap));
  }
  return cohort;
}

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

namespace {

struct PatientGroup {
  std::vector<std::size_t> rows;
  long long pos = 0;
  long long neg = 0;
};

std::vector<PatientGroup> group_by_patient(std::span<const FeatureSnapshot> cohort) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<PatientGroup> groups;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const auto [it, inserted] = index.emplace(cohort[i].patient_id, groups.size());
    if (inserted) groups.emplace_back();
    PatientGroup& g = groups[it->second];
    g.rows.push_back(i);
    (cohort[i].label > 0 ? g.pos : g.neg)++;
  }
  return groups;
}

}  // namespace

TrainTestSplit split_train_test(std::span<const FeatureSnapshot> cohort, double test_fraction,
                                std::uint64_t seed) {
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must be in (0, 1)");
  }
  auto groups = group_by_patient(cohort);
  if (groups.size() < 2) {
    throw std::runtime_error("cannot split a cohort with fewer than two patients");
  }

  long long total_pos = 0, total_neg = 0;
  for (const auto& g : groups) {
    total_pos += g.pos;
    total_neg += g.neg;
  }
  long long need_pos = std::llround(test_fraction * static_cast<double>(total_pos));
  long long need_neg = std::llround(test_fraction * static_cast<double>(total_neg));

  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0));
  rng.shuffle(order);

  // Whole patients go to test while they fit under both class targets, so
  // no patient ever straddles the boundary; everyone else trains.
  std::vector<char> in_test(cohort.size(), 0);
  for (const std::size_t gi : order) {
    const PatientGroup& g = groups[gi];
    if (g.pos <= need_pos && g.neg <= need_neg && !g.rows.empty()) {
      need_pos -= g.pos;
      need_neg -= g.neg;
      for (const std::size_t r : g.rows) in_test[r] = 1;
      if (need_pos == 0 && need_neg == 0) break;
    }
  }

  TrainTestSplit split;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    (in_test[i] ? split.test : split.train).push_back(cohort[i]);
  }
  return split;
}

std::vector<FoldSplit> kfold(std::span<const FeatureSnapshot> cohort, int k,
                             std::uint64_t seed) {
  if (k < 2) throw std::runtime_error("kfold requires k >= 2");
  if (cohort.size() < static_cast<std::size_t>(k)) {
    throw std::runtime_error("kfold requires at least k instances");
  }
  auto groups = group_by_patient(cohort);
  if (groups.size() < static_cast<std::size_t>(k)) {
    throw std::runtime_error("kfold requires at least k distinct patients");
  }

  std::vector<std::size_t> order(groups.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0));
  rng.shuffle(order);

  // Greedy least-loaded assignment keeps fold sizes within the largest
  // patient group of each other.
  std::vector<std::size_t> fold_size(k, 0);
  std::vector<int> fold_of_group(groups.size(), 0);
  for (const std::size_t gi : order) {
    int best = 0;
    for (int f = 1; f < k; ++f) {
      if (fold_size[f] < fold_size[best]) best = f;
    }
    fold_of_group[gi] = best;
    fold_size[best] += groups[gi].rows.size();
  }

  std::vector<int> fold_of_row(cohort.size(), 0);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    for (const std::size_t r : groups[gi].rows) fold_of_row[r] = fold_of_group[gi];
  }

  std::vector<FoldSplit> folds(k);
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      (fold_of_row[i] == f ? folds[f].validation : folds[f].train).push_back(cohort[i]);
    }
  }
  return folds;
}

}  // namespace wardboost
