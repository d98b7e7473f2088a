#include "wardboost/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "wardboost/csv.hpp"
#include "wardboost/rng.hpp"

namespace wardboost::metrics {

namespace {

void check_labels(std::span<const int> labels) {
  bool has_pos = false, has_neg = false;
  for (const int y : labels) {
    if (y == +1) {
      has_pos = true;
    } else if (y == -1) {
      has_neg = true;
    } else {
      throw std::invalid_argument("labels must be +1 or -1");
    }
  }
  if (!has_pos || !has_neg) throw std::runtime_error("both classes required");
}

}  // namespace

Confusion confusion(std::span<const int> labels, std::span<const int> predictions) {
  if (labels.empty()) throw std::invalid_argument("confusion requires nonempty input");
  if (labels.size() != predictions.size()) {
    throw std::invalid_argument("labels and predictions differ in length");
  }
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] > 0) {
      (predictions[i] > 0 ? c.tp : c.fn)++;
    } else {
      (predictions[i] > 0 ? c.fp : c.tn)++;
    }
  }
  return c;
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  check_labels(labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Concordant pairs counted exactly in integers, ties worth one half
  // (doubled so the accumulator stays integral).
  long long pos_total = 0, neg_total = 0;
  for (const int y : labels) (y > 0 ? pos_total : neg_total)++;

  long long twice_concordance = 0;
  long long neg_below = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = scores[order[i]];
    long long pos_here = 0, neg_here = 0;
    while (i < order.size() && scores[order[i]] == v) {
      (labels[order[i]] > 0 ? pos_here : neg_here)++;
      ++i;
    }
    twice_concordance += pos_here * (2 * neg_below + neg_here);
    neg_below += neg_here;
  }
  return static_cast<double>(twice_concordance) /
         (2.0 * static_cast<double>(pos_total) * static_cast<double>(neg_total));
}

std::vector<RocPoint> roc_points(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  check_labels(labels);

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  long long pos_total = 0, neg_total = 0;
  for (const int y : labels) (y > 0 ? pos_total : neg_total)++;

  std::vector<RocPoint> points;
  points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  long long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double v = scores[order[i]];
    while (i < order.size() && scores[order[i]] == v) {
      (labels[order[i]] > 0 ? tp : fp)++;
      ++i;
    }
    points.push_back({static_cast<double>(fp) / static_cast<double>(neg_total),
                      static_cast<double>(tp) / static_cast<double>(pos_total), v});
  }
  return points;
}

double trapezoid_area(std::span<const RocPoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += 0.5 * (points[i].tpr + points[i - 1].tpr) * (points[i].fpr - points[i - 1].fpr);
  }
  return area;
}

EvalReport evaluate(std::span<const double> scores, std::span<const int> labels,
                    double threshold) {
  EvalReport report;
  std::vector<int> predictions(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    predictions[i] = scores[i] >= threshold ? +1 : -1;
  }
  report.counts = confusion(labels, predictions);
  const auto& c = report.counts;
  report.accuracy = static_cast<double>(c.tp + c.tn) /
                    static_cast<double>(c.tp + c.fp + c.tn + c.fn);
  report.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  report.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  report.auroc = auroc(scores, labels);
  report.roc = roc_points(scores, labels);
  return report;
}

CvResult cross_validate(const Trainer& trainer, std::span<const FeatureSnapshot> cohort, int k,
                        std::uint64_t seed) {
  const auto folds = kfold(cohort, k, seed);
  CvResult result;
  for (const auto& fold : folds) {
    const Scorer scorer = trainer(fold.train);
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(fold.validation.size());
    labels.reserve(fold.validation.size());
    for (const auto& x : fold.validation) {
      scores.push_back(scorer(x));
      labels.push_back(x.label);
    }
    result.fold_aurocs.push_back(auroc(scores, labels));
  }
  result.mean_auroc =
      std::accumulate(result.fold_aurocs.begin(), result.fold_aurocs.end(), 0.0) /
      static_cast<double>(result.fold_aurocs.size());
  return result;
}

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& p : report.roc) {
    roc.push_back({{"fpr", p.fpr}, {"tpr", p.tpr}, {"threshold", p.threshold}});
  }
  return {{"tp", report.counts.tp},
          {"fp", report.counts.fp},
          {"tn", report.counts.tn},
          {"fn", report.counts.fn},
          {"accuracy", report.accuracy},
          {"sensitivity", report.sensitivity},
          {"specificity", report.specificity},
          {"auroc", report.auroc},
          {"roc", std::move(roc)}};
}

void write_roc_csv(const std::string& path, std::span<const RocPoint> points) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "fpr,tpr,threshold\n";
  for (const auto& p : points) {
    out << format_double(p.fpr) << ',' << format_double(p.tpr) << ','
        << format_double(p.threshold) << '\n';
  }
}

}  // namespace wardboost::metrics
