// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned in code next to each check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "test_support.hpp"
#include "wardboost/csv.hpp"
#include "wardboost/ensemble.hpp"
#include "wardboost/metrics.hpp"
#include "wardboost/model_io.hpp"
#include "wardboost/pews.hpp"
#include "wardboost/synth.hpp"

using namespace wardboost;

namespace {

struct Outcome {
  int number;
  std::string name;
  bool passed;
  std::string detail;
};

std::vector<Outcome> g_outcomes;

void record(int number, const std::string& name, bool passed, const std::string& detail) {
  g_outcomes.push_back({number, name, passed, detail});
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// 1. Stump search equals the exhaustive enumerator
// ---------------------------------------------------------------------------

void criterion_stump_oracle() {
  const auto start = std::chrono::steady_clock::now();
  const AgeBins bins = AgeBins::defaults();
  Rng rng(101);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto data = testing::random_table(rng, 5, 50, 0.3);
    const auto weights = testing::random_weights(rng, data.size(), trial % 2 == 0);
    const auto got = ada::best_stump(data, weights, bins);
    const auto want = testing::oracle_best_stump(data, weights, bins);
    bool ok = got.has_value() == want.has_value();
    if (ok && got.has_value()) {
      ok = std::abs(got->z - want->z) <= 1e-12 && got->stump.feature == want->stump.feature &&
           got->stump.age_bin == want->stump.age_bin &&
           got->stump.threshold == want->stump.threshold &&
           got->stump.polarity == want->stump.polarity;
    }
    if (!ok) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "%d/200 tables matched, %.1fs", 200 - mismatches,
                elapsed);
  record(1, "stump search equals exhaustive enumeration", mismatches == 0 && elapsed < 60.0,
         detail);
}

// ---------------------------------------------------------------------------
// 2. Split search equals brute force
// ---------------------------------------------------------------------------

void criterion_split_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(202);
  std::vector<int> features(kFeatureCount);
  for (int i = 0; i < kFeatureCount; ++i) features[i] = i;
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto data = testing::random_table(rng, 5, 50, 0.3);
    std::vector<double> grad(data.size()), hess(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      grad[i] = rng.uniform(-1.0, 1.0);
      hess[i] = rng.uniform(0.01, 1.0);
    }
    std::vector<int> rows(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) rows[i] = static_cast<int>(i);
    gbt::GbtParams params;
    params.lambda = trial % 3 == 0 ? 0.0 : rng.uniform(0.0, 3.0);
    params.gamma = trial % 4 == 0 ? 0.0 : rng.uniform(0.0, 0.5);
    params.min_child_weight = trial % 5 == 0 ? 0.0 : rng.uniform(0.0, 0.5);

    const auto got = gbt::find_best_split(data, rows, grad, hess, params, features);
    const auto want =
        testing::oracle_find_best_split(data, rows, grad, hess, params, features);
    bool ok = got.has_value() == want.has_value();
    if (ok && got.has_value()) {
      ok = std::abs(got->gain - want->gain) <= 1e-9 && got->feature == want->feature &&
           got->threshold == want->threshold && got->default_left == want->default_left;
    }
    if (!ok) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  char detail[128];
  std::snprintf(detail, sizeof(detail), "%d/200 tables matched, %.1fs", 200 - mismatches,
                elapsed);
  record(2, "split search equals brute force", mismatches == 0 && elapsed < 60.0, detail);
}

// ---------------------------------------------------------------------------
// 3. Gradient check
// ---------------------------------------------------------------------------

void criterion_gradient_check() {
  double worst = 0.0;
  for (const double f : {-5.0, -2.0, 0.0, 2.0, 5.0}) {
    for (const int y : {0, 1}) {
      const auto gh = gbt::logistic_grad_hess(y, f);
      worst = std::max(worst, std::abs(gh.g - testing::numeric_logistic_grad(y, f, 1e-5)));
      worst = std::max(worst, std::abs(gh.h - testing::numeric_logistic_hess(y, f, 1e-5)));
    }
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "max |analytic - finite difference| = %.2e", worst);
  record(3, "logistic gradient/hessian match finite differences", worst < 1e-6, detail);
}

// ---------------------------------------------------------------------------
// 4. Training losses are non-increasing
// ---------------------------------------------------------------------------

std::vector<FeatureSnapshot> synth_cohort(int n_encounters, double prevalence,
                                          double effect_scale, std::uint64_t seed) {
  synth::SynthConfig config = synth::default_config();
  config.n_encounters = n_encounters;
  config.transfer_prevalence = prevalence;
  config.seed = seed;
  for (double& e : config.effect_sizes) e *= effect_scale;
  const auto encounters = synth::generate(config);
  return build_cohort(encounters, derive_seed(seed, 0xC0));
}

void criterion_loss_monotone() {
  // 2,500 encounters at prevalence 0.4 give a 2,000-instance cohort.
  const auto cohort = synth_cohort(2500, 0.4, 1.0, 42);
  bool size_ok = cohort.size() == 2000;

  const AgeBins bins = AgeBins::defaults();
  const auto ada_model = ada::fit(cohort, 100, bins, 0);
  bool ada_ok = true;
  {
    std::vector<double> margins(cohort.size(), 0.0);
    double previous = 1.0;  // exponential loss of the empty model
    for (const auto& ws : ada_model.stumps) {
      double loss = 0.0;
      for (std::size_t i = 0; i < cohort.size(); ++i) {
        margins[i] += ws.alpha * ada::stump_vote(ws.stump, cohort[i], bins);
        loss += std::exp(-cohort[i].label * margins[i]);
      }
      loss /= static_cast<double>(cohort.size());
      if (loss > previous + 1e-12) ada_ok = false;
      previous = loss;
    }
  }

  gbt::GbtParams params;  // defaults: 16 trees, depth 3, eta 0.3, lambda 1
  const auto gbt_model = gbt::fit(cohort, params);
  bool gbt_ok = true;
  {
    std::vector<double> scores(cohort.size(), gbt_model.base_score);
    const auto loss_of = [&]() {
      double loss = 0.0;
      for (std::size_t i = 0; i < cohort.size(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-scores[i]));
        loss += cohort[i].label > 0 ? -std::log(p) : -std::log(1.0 - p);
      }
      return loss / static_cast<double>(cohort.size());
    };
    double previous = loss_of();
    for (const auto& tree : gbt_model.trees) {
      for (std::size_t i = 0; i < cohort.size(); ++i) scores[i] += tree.predict(cohort[i]);
      const double loss = loss_of();
      if (loss > previous + 1e-12) gbt_ok = false;
      previous = loss;
    }
  }

  char detail[160];
  std::snprintf(detail, sizeof(detail), "cohort=%zu, ada rounds fitted=%zu, gbt trees=%zu",
                cohort.size(), ada_model.stumps.size(), gbt_model.trees.size());
  record(4, "training losses non-increasing across rounds", size_ok && ada_ok && gbt_ok, detail);
}

// ---------------------------------------------------------------------------
// 5. AUROC equals pairwise concordance
// ---------------------------------------------------------------------------

void criterion_auroc_oracle() {
  Rng rng(505);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(4, 1000);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = rng.bernoulli(0.5) ? rng.uniform(0.0, 1.0)
                                     : std::round(rng.uniform(0.0, 1.0) * 10.0) / 10.0;
      labels[i] = rng.bernoulli(0.5) ? +1 : -1;
    }
    labels[0] = +1;
    labels[n - 1] = -1;
    const double trapezoid = metrics::trapezoid_area(metrics::roc_points(scores, labels));
    const double pairwise = testing::oracle_auroc_pairwise(scores, labels);
    worst = std::max(worst, std::abs(trapezoid - pairwise));
    worst = std::max(worst, std::abs(metrics::auroc(scores, labels) - pairwise));
  }
  const std::vector<double> worked_scores{0.1, 0.4, 0.35, 0.8};
  const std::vector<int> worked_labels{-1, -1, +1, +1};
  const bool worked_ok = metrics::auroc(worked_scores, worked_labels) == 0.75;

  char detail[128];
  std::snprintf(detail, sizeof(detail), "max |trapezoid - concordance| = %.2e, example=%s",
                worst, worked_ok ? "0.75" : "wrong");
  record(5, "trapezoidal ROC area equals pairwise concordance", worst <= 1e-12 && worked_ok,
         detail);
}

// ---------------------------------------------------------------------------
// 6 & 7. Benchmark models: totality and synthetic ordering
// ---------------------------------------------------------------------------

struct Benchmark {
  std::vector<FeatureSnapshot> train;
  std::vector<FeatureSnapshot> test;
  ada::AdaModel ada_model;
  gbt::GbtModel gbt_model;
  ensemble::EnsembleModel ens_model;
  pews::PewsBaseline pews_model;
  double ada_auc = 0.0, gbt_auc = 0.0, ens_auc = 0.0, pews_auc = 0.0;
};

Benchmark run_benchmark(double effect_scale, std::uint64_t seed) {
  Benchmark b;
  // 5,000 encounters at prevalence 0.4 give a 4,000-snapshot balanced cohort.
  const auto cohort = synth_cohort(5000, 0.4, effect_scale, seed);
  auto split = split_train_test(cohort, 0.2, derive_seed(seed, 0x51));
  b.train = std::move(split.train);
  b.test = std::move(split.test);

  b.ada_model = ada::fit(b.train, 100, AgeBins::defaults(), 0);
  gbt::GbtParams params;  // 16 trees, depth 3
  params.seed = seed;
  b.gbt_model = gbt::fit(b.train, params);
  b.ens_model = ensemble::EnsembleModel{b.ada_model, b.gbt_model, 0.5};
  b.pews_model.table = pews::PewsTable::default_table();
  b.pews_model.cutoff = pews::select_cutoff(b.pews_model.table, b.train);

  std::vector<int> labels;
  labels.reserve(b.test.size());
  for (const auto& x : b.test) labels.push_back(x.label);
  const auto auc_of = [&](const metrics::Scorer& scorer) {
    std::vector<double> scores;
    scores.reserve(b.test.size());
    for (const auto& x : b.test) scores.push_back(scorer(x));
    return metrics::auroc(scores, labels);
  };
  b.ada_auc = auc_of([&](const FeatureSnapshot& x) { return ada::predict_proba(b.ada_model, x); });
  b.gbt_auc = auc_of([&](const FeatureSnapshot& x) { return gbt::predict_proba(b.gbt_model, x); });
  b.ens_auc =
      auc_of([&](const FeatureSnapshot& x) { return ensemble::predict_proba(b.ens_model, x); });
  b.pews_auc = auc_of(
      [&](const FeatureSnapshot& x) { return static_cast<double>(b.pews_model.table.score(x)); });
  return b;
}

void criterion_totality(const Benchmark& b) {
  bool ok = true;
  for (double age = kMinAgeYears; age < kMaxAgeYears; age += 0.1) {
    FeatureSnapshot x;
    x.values[kFeatAge] = age;
    for (const double p : {ada::predict_proba(b.ada_model, x),
                           gbt::predict_proba(b.gbt_model, x),
                           ensemble::predict_proba(b.ens_model, x)}) {
      if (!(p > 0.0) || !(p < 1.0) || !std::isfinite(p)) ok = false;
    }
  }
  record(6, "all-missing-except-age snapshots score in (0,1) at every age", ok,
         "ada/gbt/ensemble over a 0.1-year grid");
}

void criterion_benchmark_ordering() {
  const auto start = std::chrono::steady_clock::now();
  const Benchmark signal = run_benchmark(1.0, 2026);
  criterion_totality(signal);  // reuses the fitted models

  const Benchmark null = run_benchmark(0.0, 2027);
  const double elapsed = seconds_since(start);

  const bool boost_beats_pews = signal.ada_auc >= signal.pews_auc + 0.03 &&
                                signal.gbt_auc >= signal.pews_auc + 0.03;
  const bool ensemble_holds =
      signal.ens_auc >= std::max(signal.ada_auc, signal.gbt_auc) - 0.01;
  const bool null_flat = null.ada_auc >= 0.45 && null.ada_auc <= 0.55 && null.gbt_auc >= 0.45 &&
                         null.gbt_auc <= 0.55 && null.ens_auc >= 0.45 && null.ens_auc <= 0.55 &&
                         null.pews_auc >= 0.45 && null.pews_auc <= 0.55;

  char detail[256];
  std::snprintf(detail, sizeof(detail),
                "signal auroc ada=%.3f gbt=%.3f ens=%.3f pews=%.3f | null ada=%.3f gbt=%.3f "
                "ens=%.3f pews=%.3f | %.0fs",
                signal.ada_auc, signal.gbt_auc, signal.ens_auc, signal.pews_auc, null.ada_auc,
                null.gbt_auc, null.ens_auc, null.pews_auc, elapsed);
  record(7, "synthetic benchmark ordering echoes the reported ranking",
         boost_beats_pews && ensemble_holds && null_flat && elapsed < 300.0, detail);
}

// ---------------------------------------------------------------------------
// 8. Split hygiene over 50 seeds
// ---------------------------------------------------------------------------

void criterion_split_hygiene() {
  const auto cohort = synth_cohort(700, 0.3, 1.0, 7);
  long long total_pos = 0, total_neg = 0;
  for (const auto& s : cohort) (s.label > 0 ? total_pos : total_neg)++;

  bool ok = true;
  for (std::uint64_t seed = 0; seed < 50 && ok; ++seed) {
    const auto split = split_train_test(cohort, 0.2, seed);
    std::unordered_set<std::string> train_patients, test_patients;
    long long pos = 0, neg = 0;
    for (const auto& s : split.train) train_patients.insert(s.patient_id);
    for (const auto& s : split.test) {
      test_patients.insert(s.patient_id);
      (s.label > 0 ? pos : neg)++;
    }
    for (const auto& p : test_patients) {
      if (train_patients.contains(p)) ok = false;
    }
    if (std::llabs(pos - std::llround(0.2 * static_cast<double>(total_pos))) > 1) ok = false;
    if (std::llabs(neg - std::llround(0.2 * static_cast<double>(total_neg))) > 1) ok = false;

    const auto folds = kfold(cohort, 10, seed);
    std::size_t covered = 0;
    std::unordered_set<std::string> seen_patients;
    for (const auto& fold : folds) {
      covered += fold.validation.size();
      std::unordered_set<std::string> fold_patients;
      for (const auto& s : fold.validation) fold_patients.insert(s.patient_id);
      for (const auto& p : fold_patients) {
        if (!seen_patients.insert(p).second) ok = false;  // patient in two folds
      }
    }
    if (covered != cohort.size()) ok = false;
  }
  char detail[128];
  std::snprintf(detail, sizeof(detail), "cohort=%zu snapshots, 50 seeds", cohort.size());
  record(8, "train/test and CV folds stay patient-disjoint and stratified", ok, detail);
}

// ---------------------------------------------------------------------------
// 9. Serialization fidelity
// ---------------------------------------------------------------------------

void criterion_serialization() {
  const auto cohort = synth_cohort(400, 0.3, 1.0, 11);
  const auto dir = std::filesystem::temp_directory_path();

  ada::AdaModel ada_model = ada::fit(cohort, 30, AgeBins::defaults(), 0);
  gbt::GbtParams params;
  params.num_trees = 8;
  gbt::GbtModel gbt_model = gbt::fit(cohort, params);
  ensemble::EnsembleModel ens_model{ada_model, gbt_model, 0.5};
  pews::PewsBaseline pews_model{pews::PewsTable::default_table(),
                                pews::select_cutoff(pews::PewsTable::default_table(), cohort)};

  Rng rng(909);
  std::vector<FeatureSnapshot> probes;
  for (int i = 0; i < 1000; ++i) probes.push_back(testing::random_snapshot(rng));

  bool ok = true;
  const auto check_model = [&](const AnyModel& model, const char* name) {
    const auto path = (dir / (std::string("wb_accept_") + name + ".json")).string();
    save_model(path, model);
    const auto loaded = load_model(path);
    const auto before = make_scorer(model);
    const auto after = make_scorer(loaded);
    for (const auto& x : probes) {
      if (before(x) != after(x)) {
        ok = false;
        break;
      }
    }
    std::filesystem::remove(path);
  };
  check_model(ada_model, "ada");
  check_model(gbt_model, "gbt");
  check_model(ens_model, "ensemble");
  check_model(pews_model, "pews");

  record(9, "save/load round trips reproduce predictions bit-for-bit", ok,
         "ada, gbt, ensemble, pews on 1000 probes");
}

// ---------------------------------------------------------------------------
// 10. PEWS cutoff sweep oracle
// ---------------------------------------------------------------------------

void criterion_cutoff_oracle() {
  Rng rng(1010);
  bool ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = rng.uniform_int(6, 200);
    std::vector<int> scores(n), labels(n);
    for (int i = 0; i < n; ++i) {
      scores[i] = rng.uniform_int(0, 16);
      labels[i] = rng.bernoulli(0.5) ? +1 : -1;
    }
    labels[0] = +1;
    labels[n - 1] = -1;
    if (pews::select_cutoff(scores, labels) != testing::oracle_select_cutoff(scores, labels)) {
      ok = false;
    }
  }
  const std::vector<int> sep_scores{3, 3, 3, 0, 0, 0};
  const std::vector<int> sep_labels{+1, +1, +1, -1, -1, -1};
  const bool separable_ok = pews::select_cutoff(sep_scores, sep_labels) == 1;

  record(10, "cutoff selection equals the exhaustive sweep", ok && separable_ok,
         "100 random sets; separable example picks c=1");
}

}  // namespace

int main() {
  criterion_stump_oracle();
  criterion_split_oracle();
  criterion_gradient_check();
  criterion_loss_monotone();
  criterion_auroc_oracle();
  criterion_benchmark_ordering();  // also records criterion 6
  criterion_split_hygiene();
  criterion_serialization();
  criterion_cutoff_oracle();

  std::sort(g_outcomes.begin(), g_outcomes.end(),
            [](const Outcome& a, const Outcome& b) { return a.number < b.number; });
  int failures = 0;
  for (const auto& o : g_outcomes) {
    if (!o.passed) ++failures;
    std::printf("[%s] criterion %2d: %s (%s)\n", o.passed ? "PASS" : "FAIL", o.number,
                o.name.c_str(), o.detail.c_str());
  }
  std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(g_outcomes.size()) - failures,
              g_outcomes.size());
  return failures == 0 ? 0 : 1;
}
