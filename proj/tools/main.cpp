// wardboost: synthesize ward data, build snapshot cohorts, train the
// boosting models and the PEWS baseline, evaluate, and emit prediction
// timelines. Exit codes: 0 success, 1 usage/config error, 2 data error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wardboost/csv.hpp"
#include "wardboost/model_io.hpp"
#include "wardboost/rng.hpp"
#include "wardboost/synth.hpp"

namespace {

using namespace wardboost;

struct SynthArgs {
  int n = 1000;
  double prevalence = 0.026;
  std::uint64_t seed = 0;
  std::string out_dir;
  double effect_scale = 1.0;
  double events_per_hour = 1.0;
  double rate_multiplier = 2.0;
  double readmit_prob = 0.04;
};

void cmd_synth(const SynthArgs& args) {
  synth::SynthConfig config = synth::default_config();
  config.n_encounters = args.n;
  config.transfer_prevalence = args.prevalence;
  config.seed = args.seed;
  config.events_per_hour = args.events_per_hour;
  config.transfer_rate_multiplier = args.rate_multiplier;
  config.readmit_prob = args.readmit_prob;
  if (args.effect_scale < 0.0) throw std::invalid_argument("effect-scale must be >= 0");
  for (double& e : config.effect_sizes) e *= args.effect_scale;
  synth::validate(config);

  const auto encounters = synth::generate(config);
  std::vector<VitalEvent> events;
  std::size_t transferred = 0;
  for (const auto& enc : encounters) {
    if (enc.transferred) ++transferred;
    events.insert(events.end(), enc.events.begin(), enc.events.end());
  }

  std::filesystem::create_directories(args.out_dir);
  const auto events_path = (std::filesystem::path(args.out_dir) / "events.csv").string();
  const auto encounters_path = (std::filesystem::path(args.out_dir) / "encounters.csv").string();
  write_events_csv(events_path, events);
  write_encounters_csv(encounters_path, encounters);
  std::cout << "wrote " << encounters.size() << " encounters (" << transferred
            << " transferred) and " << events.size() << " events to " << args.out_dir << "\n";
}

struct PrepArgs {
  std::string events_path;
  std::string encounters_path;
  std::string out_path;
  std::uint64_t seed = 0;
  double window_hours = 6.0;
  double lead_hours = 2.0;
  bool age_matched = false;
};

void cmd_prep(const PrepArgs& args) {
  auto encounters =
      assemble_encounters(load_encounters_csv(args.encounters_path), load_events_csv(args.events_path));
  CohortOptions options;
  options.window_hours = args.window_hours;
  options.lead_hours = args.lead_hours;
  options.age_matched = args.age_matched;
  const auto cohort = build_cohort(encounters, args.seed, options);
  write_snapshots_csv(args.out_path, cohort);
  std::size_t pos = 0;
  for (const auto& s : cohort) {
    if (s.label > 0) ++pos;
  }
  std::cout << "wrote " << cohort.size() << " snapshots (" << pos << " transfer, "
            << cohort.size() - pos << " non-transfer) to " << args.out_path << "\n";
}

struct TrainArgs {
  std::string data_path;
  std::string model;  // ada | gbt | ensemble | pews
  std::string out_path;
  std::uint64_t seed = 0;
  bool cv = false;
  int folds = 10;
  int rounds = 100;
  gbt::GbtParams gbt_params;
  int search_trials = 0;
  std::string pews_table_path;
};

pews::PewsTable load_pews_table(const std::string& path) {
  if (path.empty()) return pews::PewsTable::default_table();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open PEWS table " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(path + ": invalid JSON: " + e.what());
  }
  return pews::PewsTable::from_json(doc);
}

AnyModel train_model(const TrainArgs& args, std::span<const FeatureSnapshot> cohort) {
  if (args.model == "ada") {
    return ada::fit(cohort, args.rounds, AgeBins::defaults(), args.seed);
  }
  if (args.model == "gbt") {
    gbt::GbtParams params = args.gbt_params;
    params.seed = args.seed;
    if (args.search_trials > 0) {
      const auto search = gbt::random_search(cohort, gbt::GbtSearchSpace{}, args.folds,
                                             args.search_trials, args.seed);
      params = search.best;
      std::cout << "random search: trial " << search.best_index << " of "
                << args.search_trials << " selected, cv mean auroc "
                << search.trials[search.best_index].mean_auroc << "\n";
    }
    return gbt::fit(cohort, params);
  }
  if (args.model == "ensemble") {
    ensemble::EnsembleModel model;
    model.ada = ada::fit(cohort, args.rounds, AgeBins::defaults(), args.seed);
    gbt::GbtParams params = args.gbt_params;
    params.seed = args.seed;
    model.gbt = gbt::fit(cohort, params);
    return model;
  }
  if (args.model == "pews") {
    pews::PewsBaseline baseline{load_pews_table(args.pews_table_path), 0};
    baseline.cutoff = pews::select_cutoff(baseline.table, cohort);
    std::cout << "selected PEWS cutoff " << baseline.cutoff << "\n";
    return baseline;
  }
  throw std::invalid_argument("unknown model '" + args.model +
                              "' (expected ada, gbt, ensemble, or pews)");
}

void cmd_train(const TrainArgs& args) {
  const auto cohort = load_snapshots_csv(args.data_path);
  const AnyModel model = train_model(args, cohort);
  save_model(args.out_path, model);
  std::cout << "wrote " << model_type_name(model) << " model to " << args.out_path << "\n";

  if (args.cv) {
    const metrics::Trainer trainer = [&args](std::span<const FeatureSnapshot> fold_train) {
      TrainArgs fold_args = args;
      fold_args.search_trials = 0;  // tune once, not per fold
      auto fold_model = std::make_shared<AnyModel>(train_model(fold_args, fold_train));
      auto scorer = make_scorer(*fold_model);
      return [fold_model, scorer](const FeatureSnapshot& x) { return scorer(x); };
    };
    const auto cv = metrics::cross_validate(trainer, cohort, args.folds, args.seed);
    std::cout << args.folds << "-fold cv mean auroc: " << cv.mean_auroc << "\n";
  }
}

struct EvalArgs {
  std::string data_path;
  std::string model_path;
  std::string out_path;
  std::string roc_path;
  double threshold = -1.0;  // <0: model default
};

void cmd_eval(const EvalArgs& args) {
  const auto model = load_model(args.model_path);
  const auto test = load_snapshots_csv(args.data_path);
  if (test.empty()) throw std::runtime_error(args.data_path + ": no snapshots");

  const auto scorer = make_scorer(model);
  std::vector<double> scores;
  std::vector<int> labels;
  scores.reserve(test.size());
  labels.reserve(test.size());
  for (const auto& x : test) {
    scores.push_back(scorer(x));
    labels.push_back(x.label);
  }
  const double threshold = args.threshold >= 0.0 ? args.threshold : default_threshold(model);
  const auto report = metrics::evaluate(scores, labels, threshold);

  if (!args.out_path.empty()) {
    std::ofstream out(args.out_path);
    if (!out) throw std::runtime_error("cannot open " + args.out_path + " for writing");
    out << metrics::report_to_json(report).dump(2) << '\n';
  }
  if (!args.roc_path.empty()) {
    metrics::write_roc_csv(args.roc_path, report.roc);
  }
  std::printf("accuracy=%.4f sensitivity=%.4f specificity=%.4f auroc=%.4f\n", report.accuracy,
              report.sensitivity, report.specificity, report.auroc);
}

struct TimelineArgs {
  std::string events_path;
  std::string encounters_path;
  std::string model_path;
  std::string out_path;
  std::vector<std::string> encounter_ids;
  std::uint64_t seed = 0;
  double window_hours = 6.0;
  double lead_hours = 2.0;
};

// Observation window for one encounter: transferred stays use the window
// ending lead_hours before transfer; others get a seeded random window
// inside their event span, mirroring cohort construction.
std::pair<Timestamp, Timestamp> timeline_window(const Encounter& enc, const TimelineArgs& args,
                                                std::size_t index) {
  const Timestamp len = hours_to_seconds(args.window_hours);
  if (enc.transferred) {
    const Timestamp end = *enc.transfer_time - hours_to_seconds(args.lead_hours);
    return {end - len, end};
  }
  const Timestamp first = enc.events.front().time;
  const Timestamp last = enc.events.back().time;
  if (last - first <= len) return {last - len, last};
  Rng rng(derive_seed(args.seed, 1 + index));
  const Timestamp start =
      first + static_cast<Timestamp>(rng.uniform() * static_cast<double>(last - first - len));
  return {start, start + len};
}

void cmd_timeline(const TimelineArgs& args) {
  const auto model = load_model(args.model_path);
  const auto scorer = make_scorer(model);
  auto encounters =
      assemble_encounters(load_encounters_csv(args.encounters_path), load_events_csv(args.events_path));

  std::vector<std::size_t> selected;
  if (args.encounter_ids.empty()) {
    for (std::size_t i = 0; i < encounters.size(); ++i) {
      if (encounters[i].transferred) selected.push_back(i);
    }
  } else {
    for (const auto& id : args.encounter_ids) {
      const auto it = std::find_if(encounters.begin(), encounters.end(),
                                   [&](const Encounter& e) { return e.encounter_id == id; });
      if (it == encounters.end()) throw std::runtime_error("unknown encounter_id " + id);
      selected.push_back(static_cast<std::size_t>(it - encounters.begin()));
    }
  }

  std::ofstream out(args.out_path);
  if (!out) throw std::runtime_error("cannot open " + args.out_path + " for writing");
  out << "encounter_id,time,probability\n";
  std::size_t rows = 0;
  for (const std::size_t i : selected) {
    const Encounter& enc = encounters[i];
    if (enc.events.empty()) continue;
    const auto [start, end] = timeline_window(enc, args, i);
    for (const auto& ev : enc.events) {
      if (ev.time < start || ev.time > end) continue;
      const auto snap = extract_snapshot(enc, ev.time, args.window_hours);
      out << enc.encounter_id << ',' << format_iso8601_utc(ev.time) << ','
          << format_double(scorer(snap)) << '\n';
      ++rows;
    }
  }
  std::cout << "wrote " << rows << " timeline rows to " << args.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boosting-based early-deterioration models for ward-to-PICU transfer"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic ward cohort");
  synth_cmd->add_option("--n", synth_args.n, "Number of encounters")->capture_default_str();
  synth_cmd->add_option("--prevalence", synth_args.prevalence, "Transfer prevalence in (0,1)")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out_dir, "Output directory")->required();
  synth_cmd->add_option("--effect-scale", synth_args.effect_scale,
                        "Scales all deterioration effect sizes (0 = no signal)")
      ->capture_default_str();
  synth_cmd->add_option("--events-per-hour", synth_args.events_per_hour,
                        "Measurement rate per vital")
      ->capture_default_str();
  synth_cmd->add_option("--rate-multiplier", synth_args.rate_multiplier,
                        "Measurement rate multiplier for transferred encounters")
      ->capture_default_str();
  synth_cmd->add_option("--readmit-prob", synth_args.readmit_prob,
                        "Probability an encounter belongs to a returning patient")
      ->capture_default_str();

  PrepArgs prep_args;
  auto* prep_cmd = app.add_subcommand("prep", "Build a balanced snapshot cohort from CSVs");
  prep_cmd->add_option("--events", prep_args.events_path, "Events CSV")->required();
  prep_cmd->add_option("--encounters", prep_args.encounters_path, "Encounters CSV")->required();
  prep_cmd->add_option("--out", prep_args.out_path, "Snapshot CSV to write")->required();
  prep_cmd->add_option("--seed", prep_args.seed, "Random seed")->capture_default_str();
  prep_cmd->add_option("--window-hours", prep_args.window_hours, "Observation window length")
      ->capture_default_str();
  prep_cmd->add_option("--lead-hours", prep_args.lead_hours,
                       "Gap between window end and transfer")
      ->capture_default_str();
  prep_cmd->add_flag("--age-matched", prep_args.age_matched,
                     "Match negatives by age bin where possible");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Fit a model and write it as JSON");
  train_cmd->add_option("--data", train_args.data_path, "Training snapshot CSV")->required();
  train_cmd->add_option("--model", train_args.model, "ada | gbt | ensemble | pews")->required();
  train_cmd->add_option("--out", train_args.out_path, "Model JSON to write")->required();
  train_cmd->add_option("--seed", train_args.seed, "Random seed")->capture_default_str();
  train_cmd->add_flag("--cv", train_args.cv, "Report k-fold cross-validated AUROC");
  train_cmd->add_option("--folds", train_args.folds, "Cross-validation folds")
      ->capture_default_str();
  train_cmd->add_option("--rounds", train_args.rounds, "AdaBoost rounds")->capture_default_str();
  train_cmd->add_option("--trees", train_args.gbt_params.num_trees, "GBT trees")
      ->capture_default_str();
  train_cmd->add_option("--depth", train_args.gbt_params.max_depth, "GBT max depth")
      ->capture_default_str();
  train_cmd->add_option("--eta", train_args.gbt_params.learning_rate, "GBT learning rate")
      ->capture_default_str();
  train_cmd->add_option("--lambda", train_args.gbt_params.lambda, "GBT L2 penalty")
      ->capture_default_str();
  train_cmd->add_option("--gamma", train_args.gbt_params.gamma, "GBT per-leaf penalty")
      ->capture_default_str();
  train_cmd->add_option("--min-child-weight", train_args.gbt_params.min_child_weight,
                        "GBT minimum child hessian sum")
      ->capture_default_str();
  train_cmd->add_option("--colsample", train_args.gbt_params.colsample,
                        "GBT per-tree feature fraction")
      ->capture_default_str();
  train_cmd->add_option("--search-trials", train_args.search_trials,
                        "Random-search trials for GBT hyperparameters (0 = off)")
      ->capture_default_str();
  train_cmd->add_option("--pews-table", train_args.pews_table_path,
                        "PEWS table JSON (default: built-in table)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score a test set and write a report");
  eval_cmd->add_option("--data", eval_args.data_path, "Test snapshot CSV")->required();
  eval_cmd->add_option("--model", eval_args.model_path, "Model JSON")->required();
  eval_cmd->add_option("--out", eval_args.out_path, "Report JSON to write");
  eval_cmd->add_option("--roc", eval_args.roc_path, "ROC CSV to write");
  eval_cmd->add_option("--threshold", eval_args.threshold,
                       "Decision threshold (default: 0.5, or the PEWS cutoff)");

  TimelineArgs timeline_args;
  auto* timeline_cmd =
      app.add_subcommand("timeline", "Emit per-measurement predictions over a window");
  timeline_cmd->add_option("--events", timeline_args.events_path, "Events CSV")->required();
  timeline_cmd->add_option("--encounters", timeline_args.encounters_path, "Encounters CSV")
      ->required();
  timeline_cmd->add_option("--model", timeline_args.model_path, "Model JSON")->required();
  timeline_cmd->add_option("--out", timeline_args.out_path, "Timeline CSV to write")->required();
  timeline_cmd->add_option("--encounter", timeline_args.encounter_ids,
                           "Encounter id(s) to plot (default: all transferred)");
  timeline_cmd->add_option("--seed", timeline_args.seed, "Seed for non-transfer windows")
      ->capture_default_str();
  timeline_cmd->add_option("--window-hours", timeline_args.window_hours,
                           "Observation window length")
      ->capture_default_str();
  timeline_cmd->add_option("--lead-hours", timeline_args.lead_hours,
                           "Gap between window end and transfer")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) {
      if (!(synth_args.prevalence > 0.0) || !(synth_args.prevalence < 1.0)) {
        throw std::invalid_argument("prevalence must be in (0, 1)");
      }
      cmd_synth(synth_args);
    } else if (prep_cmd->parsed()) {
      cmd_prep(prep_args);
    } else if (train_cmd->parsed()) {
      cmd_train(train_args);
    } else if (eval_cmd->parsed()) {
      cmd_eval(eval_args);
    } else if (timeline_cmd->parsed()) {
      cmd_timeline(timeline_args);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
